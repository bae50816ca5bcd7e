//! Straight-line backtest: positions, ledger and metrics written out step by step.

#[derive(Debug, Clone)]
pub struct Expected {
    pub positions: Vec<i8>,
    pub asset: Vec<f64>,
    pub gross: Vec<f64>,
    pub turnover: Vec<f64>,
    pub net: Vec<f64>,
    pub sharpe: f64,
    pub mdd: f64,
    pub ann_return: f64,
    pub ann_vol: f64,
    pub total_turnover: f64,
}

/// `finals` are next-day targets: the position on day `t` is `finals[t - 1]`.
pub fn run(closes: &[f64], finals: &[i8], cost: f64) -> Expected {
    let n = closes.len();
    let mut positions = vec![0i8; n];
    positions[1..n].copy_from_slice(&finals[..n - 1]);
    let mut e = from_positions(closes, &positions, cost);
    e.positions = positions;
    e
}

pub fn from_positions(closes: &[f64], w: &[i8], cost: f64) -> Expected {
    let n = closes.len();
    let mut asset = vec![0.0; n];
    let mut gross = vec![0.0; n];
    let mut turnover = vec![0.0; n];
    let mut net = vec![0.0; n];
    turnover[0] = (w[0] as f64).abs();
    net[0] = -turnover[0] * cost;
    for t in 1..n {
        asset[t] = (closes[t] - closes[t - 1]) / closes[t - 1];
        gross[t] = w[t] as f64 * asset[t];
        let base = 1.0 + gross[t - 1];
        let carried = if base == 0.0 {
            w[t - 1] as f64
        } else {
            w[t - 1] as f64 * (1.0 + asset[t - 1]) / base
        };
        turnover[t] = (w[t] as f64 - carried).abs();
        net[t] = gross[t] - turnover[t] * cost;
    }
    let scored = &net[1..];
    let ann_return = annualized_return(scored);
    let ann_vol = annualized_vol(scored);
    Expected {
        positions: w.to_vec(),
        sharpe: if ann_vol > 0.0 { ann_return / ann_vol } else { 0.0 },
        mdd: max_drawdown(scored),
        ann_return,
        ann_vol,
        total_turnover: turnover.iter().sum(),
        asset,
        gross,
        turnover,
        net,
    }
}

/// Geometric annualization through log growth.
pub fn annualized_return(r: &[f64]) -> f64 {
    if r.iter().any(|x| *x <= -1.0) {
        return -1.0;
    }
    let log_growth: f64 = r.iter().map(|x| x.ln_1p()).sum();
    (log_growth * 252.0 / r.len() as f64).exp_m1()
}

pub fn annualized_vol(r: &[f64]) -> f64 {
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let mut ss = 0.0;
    for x in r {
        ss += (x - mean).powi(2);
    }
    16.0 * (ss / n).sqrt()
}

pub fn max_drawdown(r: &[f64]) -> f64 {
    let mut wealth = vec![1.0];
    for x in r {
        let last = *wealth.last().unwrap();
        wealth.push(last * (1.0 + x));
    }
    let mut worst: f64 = 0.0;
    for x in 1..wealth.len() {
        let peak = wealth[..=x].iter().cloned().fold(f64::MIN, f64::max);
        worst = worst.min(wealth[x] / peak - 1.0);
    }
    worst.max(-1.0)
}
