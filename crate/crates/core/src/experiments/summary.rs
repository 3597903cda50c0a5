use serde::{Deserialize, Serialize};

/// Mean, SD (divisor `count - 1`), extremes and range over mean of a column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub quantity: String,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub range_over_mean: f64,
}

impl SummaryRow {
    /// Summarizes the finite values; `None` if there are none.
    pub fn of(quantity: impl Into<String>, values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(SummaryRow { quantity: quantity.into(), count: v.len(), mean, sd, min, max, range_over_mean: (max - min) / mean })
    }
}

/// One `(replication, quantity, value)` record of the long-format export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub replication: usize,
    pub quantity: String,
    pub value: f64,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("quantity,count,mean,sd,min,max,range_over_mean\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            r.quantity, r.count, r.mean, r.sd, r.min, r.max, r.range_over_mean
        ));
    }
    out
}

pub fn long_csv(rows: &[LongRow]) -> String {
    let mut out = String::from("replication,quantity,value\n");
    for r in rows {
        out.push_str(&format!("{},{},{:.17e}\n", r.replication, r.quantity, r.value));
    }
    out
}
