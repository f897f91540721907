//! Integration of `ż = N0 z / t + N1 z / (1 - t)` on `(0, 1)`.
//!
//! Both endpoints are singular. The start uses the power-series solution
//! `z(t) = Σ a_k t^k` at `t = eps_start`, which exists because `N0` is
//! nilpotent and `N0 z0 = 0`. The end stops at `1 - eps_end`, then runs
//! `halvings` further segments toward 1 and reports the change over them
//! as `endpoint_gap`.

use std::thread;

use crate::error::{Error, Result};
use crate::realize::{NumericRealization, Realization};

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub eps_start: f64,
    pub eps_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub halvings: u32,
    pub sample_count: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            eps_start: 1e-6,
            eps_end: 1e-6,
            rtol: 1e-9,
            atol: 1e-12,
            min_step: 1e-10,
            max_step: 1e-2,
            halvings: 2,
            sample_count: 200,
        }
    }
}

impl IntegratorConfig {
    /// Settings close to a default `ode45` run: loose tolerances, a `1e-8`
    /// step floor, and a clipped end at `1 - 1e-4` with no refinement.
    pub fn paper_like() -> Self {
        IntegratorConfig {
            eps_start: 1e-8,
            eps_end: 1e-4,
            rtol: 1e-3,
            atol: 1e-6,
            min_step: 1e-8,
            max_step: 2e-2,
            halvings: 0,
            sample_count: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        let finite = [self.eps_start, self.eps_end, self.rtol, self.atol, self.min_step, self.max_step]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return fail("integrator settings must be finite".into());
        }
        if !(self.eps_start > 0.0 && self.eps_end > 0.0 && self.eps_start < 1.0 - self.eps_end) {
            return fail(format!(
                "need 0 < eps_start < 1 - eps_end, got eps_start={} eps_end={}",
                self.eps_start, self.eps_end
            ));
        }
        if self.eps_start >= 0.25 {
            return fail(format!("eps_start={} must be below 0.25", self.eps_start));
        }
        if self.eps_end >= 0.5 {
            return fail(format!("eps_end={} must be below 0.5", self.eps_end));
        }
        if self.rtol <= 0.0 || self.atol <= 0.0 {
            return fail(format!("tolerances must be positive, got rtol={} atol={}", self.rtol, self.atol));
        }
        if !(self.min_step > 0.0 && self.min_step < self.max_step) {
            return fail(format!(
                "need 0 < min_step < max_step, got {} and {}",
                self.min_step, self.max_step
            ));
        }
        if self.halvings > 40 {
            return fail(format!("halvings={} is more than 40", self.halvings));
        }
        if self.sample_count < 4 {
            return fail(format!("sample_count={} is below 4", self.sample_count));
        }
        Ok(())
    }

    /// `1 - eps_end / 2^halvings`.
    pub fn terminal_t(&self) -> f64 {
        1.0 - self.eps_end / 2f64.powi(self.halvings as i32)
    }

    /// Strictly increasing sample times: `eps_start`, a uniform grid up to
    /// `0.5` (inclusive), then points approaching `terminal_t` geometrically.
    pub fn sample_grid(&self) -> Vec<f64> {
        let n_u = self.sample_count / 2;
        let n_g = self.sample_count - n_u;
        let mut grid = Vec::with_capacity(self.sample_count);
        grid.push(self.eps_start);
        for i in 1..n_u {
            grid.push(0.5 * i as f64 / (n_u - 1) as f64);
        }
        let gap = 1.0 - self.terminal_t();
        let r = (2.0 * gap).powf(1.0 / n_g as f64);
        for j in 1..n_g {
            grid.push(1.0 - 0.5 * r.powi(j as i32));
        }
        grid.push(self.terminal_t());
        let mut out: Vec<f64> = Vec::with_capacity(grid.len());
        for t in grid {
            if out.last().is_none_or(|&p| t > p) {
                out.push(t);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    /// `(t, y)` with `t` strictly increasing.
    pub samples: Vec<(f64, f64)>,
    pub terminal_t: f64,
    pub terminal_y: f64,
    /// `|y(1 - eps_end) - y(terminal_t)|`.
    pub endpoint_gap: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

impl EvalResult {
    /// The sample taken exactly at `t`, if the grid contains it.
    pub fn sample_at(&self, t: f64) -> Option<f64> {
        self.samples.iter().find(|s| s.0 == t).map(|s| s.1)
    }
}

/// `N0 z / t + N1 z / (1 - t)`.
pub fn vector_field(nr: &NumericRealization, t: f64, z: &[f64]) -> Result<Vec<f64>> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} is outside (0, 1)")));
    }
    if z.len() != nr.dim {
        return Err(Error::Domain(format!("state has length {}, expected {}", z.len(), nr.dim)));
    }
    let field = Field::new(nr);
    let mut out = vec![0.0; nr.dim];
    field.eval(t, z, &mut out);
    Ok(out)
}

struct Field {
    dim: usize,
    n0: Vec<(usize, usize, f64)>,
    n1: Vec<(usize, usize, f64)>,
}

impl Field {
    fn new(nr: &NumericRealization) -> Self {
        let sparse = |m: &[f64]| {
            m.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, &v)| (i / nr.dim, i % nr.dim, v))
                .collect()
        };
        Field { dim: nr.dim, n0: sparse(&nr.n0), n1: sparse(&nr.n1) }
    }

    fn eval(&self, t: f64, z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let (u0, u1) = (1.0 / t, 1.0 / (1.0 - t));
        for &(r, c, v) in &self.n0 {
            out[r] += v * z[c] * u0;
        }
        for &(r, c, v) in &self.n1 {
            out[r] += v * z[c] * u1;
        }
    }

    fn mul(m: &[(usize, usize, f64)], x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(r, c, v) in m {
            out[r] += v * x[c];
        }
    }
}

/// `z(eps)` from the series solution: `(k I - N0) a_k = N1 Σ_{j<k} a_j`, `a_0 = z0`.
fn series_start(field: &Field, z0: &[f64], eps: f64) -> Vec<f64> {
    let dim = field.dim;
    let mut z = z0.to_vec();
    let mut partial = z0.to_vec();
    let (mut r, mut a, mut tmp) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut power = 1.0;
    for k in 1..=60 {
        let kf = k as f64;
        Field::mul(&field.n1, &partial, &mut r);
        a.iter_mut().zip(&r).for_each(|(ai, ri)| *ai = ri / kf);
        // N0 is nilpotent, so dim rounds of the fixed point are exact
        for _ in 0..dim {
            Field::mul(&field.n0, &a, &mut tmp);
            for i in 0..dim {
                a[i] = (r[i] + tmp[i]) / kf;
            }
        }
        power *= eps;
        let mut largest = 0f64;
        for i in 0..dim {
            z[i] += a[i] * power;
            partial[i] += a[i];
            largest = largest.max((a[i] * power).abs());
        }
        let scale = z.iter().fold(1f64, |m, v| m.max(v.abs()));
        if largest <= 1e-18 * scale {
            break;
        }
    }
    z
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus the embedded fourth-order ones
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

struct Stepper<'a> {
    field: &'a Field,
    t: f64,
    z: Vec<f64>,
    // FSAL: derivative at (t, z)
    k: [Vec<f64>; 7],
    h: f64,
    err_prev: f64,
    accepted: usize,
    rejected: usize,
    y_new: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(field: &'a Field, t: f64, z: Vec<f64>, h: f64) -> Self {
        let dim = field.dim;
        let mut k: [Vec<f64>; 7] = Default::default();
        for ki in &mut k {
            *ki = vec![0.0; dim];
        }
        field.eval(t, &z, &mut k[0]);
        Stepper {
            field,
            t,
            z,
            k,
            h,
            err_prev: 1e-4,
            accepted: 0,
            rejected: 0,
            y_new: vec![0.0; dim],
            scratch: vec![0.0; dim],
        }
    }

    /// One trial step of size `h`; fills `y_new` and `k[6]`, returns the 5th-order error vector in `scratch`.
    fn trial(&mut self, h: f64) {
        let dim = self.field.dim;
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = self.z[i];
                for j in 0..s {
                    acc += h * A[s][j] * self.k[j][i];
                }
                self.scratch[i] = acc;
            }
            self.field.eval(self.t + C[s] * h, &self.scratch, &mut self.k[s]);
        }
        // stage 7 is evaluated at the fifth-order solution (row 6 of A)
        self.y_new.copy_from_slice(&self.scratch);
        for i in 0..dim {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * self.k[j][i];
            }
            self.scratch[i] = h * e;
        }
    }

    fn error_norm(&self, rtol: f64, atol: f64) -> f64 {
        let dim = self.field.dim;
        let mut sum = 0.0;
        for i in 0..dim {
            let sc = atol + rtol * self.z[i].abs().max(self.y_new[i].abs());
            let r = self.scratch[i] / sc;
            sum += r * r;
        }
        (sum / dim as f64).sqrt()
    }

    fn accept(&mut self, h: f64) -> Result<()> {
        self.t += h;
        std::mem::swap(&mut self.z, &mut self.y_new);
        self.k.swap(0, 6);
        self.accepted += 1;
        if self.z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: self.t });
        }
        Ok(())
    }

    /// Adaptive steps until `t == target` exactly.
    fn advance_to(&mut self, target: f64, cfg: &IntegratorConfig) -> Result<()> {
        while self.t < target {
            let mut h = self.h.min(cfg.max_step);
            let last = self.t + h >= target;
            if last {
                h = target - self.t;
            }
            self.trial(h);
            let err = self.error_norm(cfg.rtol, cfg.atol);
            if !err.is_finite() {
                return Err(Error::NonFinite { t: self.t + h });
            }
            if err <= 1.0 {
                let fac = err.max(1e-10).powf(-ALPHA) * self.err_prev.powf(BETA);
                let grown = h * (SAFETY * fac).clamp(FAC_MIN, FAC_MAX);
                self.err_prev = err.max(1e-4);
                self.accept(h)?;
                if last {
                    self.t = target;
                    // keep the pre-clamp proposal when the step was cut short
                    self.h = self.h.max(grown);
                } else {
                    self.h = grown;
                }
            } else {
                self.rejected += 1;
                self.h = h * (SAFETY * err.powf(-0.2)).max(FAC_MIN);
                if self.h < cfg.min_step {
                    return Err(Error::StepUnderflow { t: self.t, h: self.h, state: self.z.clone() });
                }
            }
        }
        Ok(())
    }

    fn output(&self, c: &[f64]) -> f64 {
        c.iter().zip(&self.z).map(|(a, b)| a * b).sum()
    }
}

fn start<'a>(field: &'a Field, nr: &NumericRealization, cfg: &IntegratorConfig) -> Result<Stepper<'a>> {
    cfg.validate()?;
    let mut defect = vec![0.0; nr.dim];
    Field::mul(&field.n0, &nr.z0, &mut defect);
    if defect.iter().any(|v| *v != 0.0) {
        return Err(Error::Domain("N0 z0 is nonzero; the start at t = 0 is not regular".into()));
    }
    let z = series_start(field, &nr.z0, cfg.eps_start);
    let h0 = (0.1 * cfg.eps_start).clamp(cfg.min_step, cfg.max_step);
    Ok(Stepper::new(field, cfg.eps_start, z, h0))
}

pub fn integrate(nr: &NumericRealization, cfg: &IntegratorConfig) -> Result<EvalResult> {
    let field = Field::new(nr);
    let mut st = start(&field, nr, cfg)?;
    let grid = cfg.sample_grid();
    let clip = 1.0 - cfg.eps_end;
    let terminal_t = cfg.terminal_t();

    let mut samples = Vec::with_capacity(grid.len());
    let mut y_clip = None;
    let mut gi = 0;
    // stops: every sample time, plus 1 - eps_end
    loop {
        let next_sample = grid.get(gi).copied();
        let want_clip = y_clip.is_none();
        let target = match (next_sample, want_clip) {
            (Some(s), true) => s.min(clip),
            (Some(s), false) => s,
            (None, true) => clip,
            (None, false) => break,
        };
        st.advance_to(target, cfg)?;
        let y = st.output(&nr.c);
        if want_clip && target == clip {
            y_clip = Some(y);
        }
        if next_sample == Some(target) {
            samples.push((target, y));
            gi += 1;
        }
    }
    let terminal_y = samples.last().map(|s| s.1).unwrap_or(f64::NAN);
    let endpoint_gap = (terminal_y - y_clip.unwrap_or(terminal_y)).abs();
    Ok(EvalResult {
        samples,
        terminal_t,
        terminal_y,
        endpoint_gap,
        steps_accepted: st.accepted,
        steps_rejected: st.rejected,
    })
}

/// State and output at a single interior time `t` in `(eps_start, 1)`.
pub fn integrate_until(nr: &NumericRealization, cfg: &IntegratorConfig, t: f64) -> Result<(Vec<f64>, f64)> {
    if !(t > cfg.eps_start && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} is outside (eps_start, 1)")));
    }
    let field = Field::new(nr);
    let mut st = start(&field, nr, cfg)?;
    st.advance_to(t, cfg)?;
    let y = st.output(&nr.c);
    Ok((st.z, y))
}

/// `steps` equal Dormand-Prince steps from `(t0, z)` to `t1`, no error control.
pub fn integrate_fixed(nr: &NumericRealization, t0: f64, z: &[f64], t1: f64, steps: usize) -> Result<Vec<f64>> {
    if !(0.0 < t0 && t0 < t1 && t1 < 1.0) || steps == 0 {
        return Err(Error::Domain(format!("need 0 < t0 < t1 < 1 and steps > 0, got {t0}, {t1}, {steps}")));
    }
    let field = Field::new(nr);
    let h = (t1 - t0) / steps as f64;
    let mut st = Stepper::new(&field, t0, z.to_vec(), h);
    for i in 0..steps {
        st.trial(h);
        st.accept(h)?;
        st.t = t0 + (i + 1) as f64 * h;
    }
    Ok(st.z)
}

/// One [`integrate`] per θ, order preserved. With `jobs > 1` the θ values are
/// spread over that many threads; results do not depend on `jobs`.
pub fn sweep_theta(
    r: &Realization,
    thetas: &[f64],
    cfg: &IntegratorConfig,
    jobs: usize,
) -> Result<Vec<EvalResult>> {
    let run = |theta: f64| {
        integrate(&r.instantiate(theta), cfg).map_err(|e| Error::AtTheta { theta, source: Box::new(e) })
    };
    let jobs = jobs.max(1).min(thetas.len().max(1));
    if jobs == 1 {
        return thetas.iter().map(|&th| run(th)).collect();
    }
    let mut slots: Vec<Option<Result<EvalResult>>> = vec![None; thetas.len()];
    thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                let run = &run;
                s.spawn(move || {
                    thetas
                        .iter()
                        .enumerate()
                        .skip(w)
                        .step_by(jobs)
                        .map(|(i, &th)| (i, run(th)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, res) in h.join().expect("sweep worker panicked") {
                slots[i] = Some(res);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every θ is assigned to a worker")).collect()
}
