//! Simulation settings used by the experiments and the acceptance suite.

use crate::error::Result;
use crate::simulate::{
    BurstyModel, GammaRenewal, IsiModel, JitterModel, MaModel, PositiveDist, Segment,
};

/// A rate profile together with the windows used to analyse it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub segments: Vec<Segment>,
    pub windows: Vec<f64>,
}

impl Scenario {
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn change_points(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::new();
        for s in &self.segments[..self.segments.len() - 1] {
            acc += s.length;
            out.push(acc);
        }
        out
    }
}

pub fn gamma(mean: f64, sd: f64) -> IsiModel {
    IsiModel::Renewal(GammaRenewal { mean, sd })
}

/// Moving average with `a_k = c^k`, `k = 0..=m`, and Gamma `X` scaled so the
/// intervals have the given mean and standard deviation.
pub fn geometric_ma(c: f64, m: usize, mean: f64, sd: f64) -> Result<IsiModel> {
    Ok(IsiModel::Ma(MaModel::gamma_with_isi_moments(
        MaModel::geometric_coeffs(c, m),
        mean,
        sd,
    )?))
}

/// Jitter model with `sigma1 = f1 nu` and `sigma2 = f2 nu`.
pub fn scaled_jitter(nu: f64, f1: f64, f2: f64) -> IsiModel {
    IsiModel::Jitter(JitterModel {
        nu,
        sigma1: f1 * nu,
        sigma2: f2 * nu,
    })
}

pub fn example_ma() -> Result<IsiModel> {
    geometric_ma(0.25, 3, 0.2, 0.1)
}

pub fn example_jitter() -> IsiModel {
    IsiModel::Jitter(JitterModel {
        nu: 0.3,
        sigma1: 0.06,
        sigma2: 0.12,
    })
}

pub fn example_bursty() -> IsiModel {
    IsiModel::Bursty(BurstyModel {
        p_i: 0.5,
        p_j: 0.4,
        dist_x: PositiveDist::Uniform {
            low: 0.45,
            high: 0.73,
        },
        dist_y: PositiveDist::Uniform {
            low: 0.01,
            high: 0.12,
        },
    })
}

/// Stationary Gamma renewal train with about 200 events in the smallest window.
pub fn level_h0() -> Result<Scenario> {
    Ok(Scenario {
        name: "level-h0",
        segments: vec![Segment::new(gamma(0.25, 0.25), 600.0)?],
        windows: vec![50.0, 75.0, 100.0],
    })
}

/// Four Gamma segments at 2.5, 3, 6 and 10 Hz with change points at 150, 300 and 360 s.
pub fn four_step() -> Result<Scenario> {
    let seg = |rate: f64, len: f64| Segment::new(gamma(1.0 / rate, 0.2), len);
    Ok(Scenario {
        name: "four-step",
        segments: vec![
            seg(2.5, 150.0)?,
            seg(3.0, 150.0)?,
            seg(6.0, 60.0)?,
            seg(10.0, 90.0)?,
        ],
        windows: vec![50.0, 100.0, 150.0],
    })
}

/// Stationary positively correlated moving average, `a_k = c^k`, interval sd 0.15.
pub fn ma_level(c: f64, m: usize) -> Result<Scenario> {
    Ok(Scenario {
        name: "ma-level",
        segments: vec![Segment::new(geometric_ma(c, m, 0.1, 0.15)?, 300.0)?],
        windows: vec![25.0, 50.0, 75.0, 100.0],
    })
}

/// Negatively correlated jitter trains with a 5% rate increase between 150 and 300 s.
/// `rho^2` is about half of `sigma^2`.
pub fn jitter_power() -> Result<Scenario> {
    let j = |nu: f64| scaled_jitter(nu, 0.4, 0.3);
    Ok(Scenario {
        name: "jitter-power",
        segments: vec![
            Segment::new(j(0.2), 150.0)?,
            Segment::new(j(0.19), 150.0)?,
            Segment::new(j(0.2), 150.0)?,
        ],
        windows: vec![25.0, 50.0, 75.0],
    })
}

/// Positively correlated trains at 10, 8 and 5 Hz, `a_k = 0.5^k`, `m = 3`.
pub fn local_vs_global() -> Result<Scenario> {
    let seg =
        |mean: f64| -> Result<Segment> { Segment::new(geometric_ma(0.5, 3, mean, 0.15)?, 100.0) };
    Ok(Scenario {
        name: "local-vs-global",
        segments: vec![seg(0.1)?, seg(0.125)?, seg(0.2)?],
        windows: vec![25.0, 50.0, 75.0, 100.0],
    })
}

/// Jitter train whose beat period doubles in the middle.
pub fn simpson() -> Result<Scenario> {
    Ok(Scenario {
        name: "simpson",
        segments: vec![
            Segment::new(example_jitter(), 300.0)?,
            Segment::new(scaled_jitter(0.6, 0.2, 0.4), 300.0)?,
        ],
        windows: vec![50.0],
    })
}
