use std::fmt::Write as _;

/// One named scalar result.
#[derive(Debug, Clone, PartialEq)]
pub struct NormRecord {
    pub quantity: String,
    pub k: Option<i32>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub value: f64,
}

impl NormRecord {
    pub fn new(quantity: impl Into<String>, value: f64) -> Self {
        Self { quantity: quantity.into(), k: None, q: None, r: None, value }
    }

    pub fn at_level(mut self, k: i32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_exponents(mut self, q: f64, r: f64) -> Self {
        self.q = Some(q);
        self.r = Some(r);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormReport {
    pub records: Vec<NormRecord>,
}

impl NormReport {
    pub fn push(&mut self, record: NormRecord) {
        self.records.push(record);
    }

    /// All values finite and non-negative.
    pub fn is_well_formed(&self) -> bool {
        self.records.iter().all(|r| r.value.is_finite() && r.value >= 0.0)
    }

    /// CSV with header `experiment_id,quantity,k,q,r,value`; absent fields are
    /// empty and infinite exponents are written `inf`.
    pub fn to_csv(&self, experiment_id: &str) -> String {
        let mut out = String::from("experiment_id,quantity,k,q,r,value\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                experiment_id,
                r.quantity,
                r.k.map(|k| k.to_string()).unwrap_or_default(),
                r.q.map(format_exponent).unwrap_or_default(),
                r.r.map(format_exponent).unwrap_or_default(),
                r.value
            );
        }
        out
    }
}

pub fn format_exponent(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        x.to_string()
    }
}
