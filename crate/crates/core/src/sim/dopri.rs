//! Dormand–Prince 5(4) with the coefficients of Hairer, Nørsett and Wanner.

use alloc::vec::Vec;

use crate::math;

use super::{check_state, IntegrateOptions, Rhs, SimError, Trajectory, TrajectoryMeta};

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
/// Fifth-order minus embedded fourth-order weights.
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

fn scaled_norm(v: &[f64], x: &[f64], y: &[f64], rtol: f64, atol: f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let s: f64 = v
        .iter()
        .zip(x.iter().zip(y))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * math::abs(*a).max(math::abs(*b));
            (e / sc) * (e / sc)
        })
        .sum();
    math::sqrt(s / v.len() as f64)
}

fn initial_step(rhs: &mut Rhs<'_>, t0: f64, x0: &[f64], f0: &[f64], rtol: f64, atol: f64, span: f64) -> Result<f64, SimError> {
    let d0 = scaled_norm(x0, x0, x0, rtol, atol);
    let d1 = scaled_norm(f0, x0, x0, rtol, atol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let x1: Vec<f64> = x0.iter().zip(f0).map(|(x, f)| x + h0 * f).collect();
    let mut f1 = alloc::vec![0.0; x0.len()];
    rhs.eval(t0 + h0, &x1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| (a - b) / h0).collect();
    let d2 = scaled_norm(&diff, x0, x0, rtol, atol);
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { math::pow(0.01 / d1.max(d2), 0.2) };
    Ok((100.0 * h0).min(h1).min(span))
}

pub(super) fn integrate(
    rhs: &mut Rhs<'_>,
    x0: &[f64],
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, SimError> {
    if !(rtol > 0.0 && atol >= 0.0) {
        return Err(SimError::InvalidOptions("dopri5 needs rtol > 0 and atol >= 0"));
    }
    let d = x0.len();
    let mut traj = Trajectory::empty(rhs.net.layout().clone(), TrajectoryMeta::dopri(rtol, atol));
    let mut x = x0.to_vec();
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| alloc::vec![0.0; d]).collect();
    rhs.eval(t0, &x, &mut k[0])?;
    traj.push(t0, &x, &k[0]);
    if d == 0 {
        traj.push(t1, &x, &k[0]);
        return Ok(traj);
    }

    let mut stops: Vec<f64> = match &opts.output_times {
        Some(ts) => ts.iter().copied().filter(|&s| s > t0 && s < t1).collect(),
        None => Vec::new(),
    };
    stops.sort_by(|a, b| a.partial_cmp(b).expect("finite output times"));
    stops.dedup();
    stops.push(t1);
    let store_every_step = opts.output_times.is_none();
    let mut next_stop = 0;

    let mut h = initial_step(rhs, t0, &x, &k[0].clone(), rtol, atol, t1 - t0)?;
    let mut t = t0;
    let mut stage = alloc::vec![0.0; d];
    let mut x_new = alloc::vec![0.0; d];
    let mut err = alloc::vec![0.0; d];
    let mut steps = 0usize;
    while t < t1 {
        if steps >= opts.max_steps {
            return Err(SimError::TooManySteps(opts.max_steps));
        }
        let target = stops[next_stop];
        let mut landing = false;
        let mut step = h;
        if t + step >= target || target - (t + step) <= 1e-12 * math::abs(target).max(1.0) {
            step = target - t;
            landing = true;
        }
        if step <= 1e-14 * math::abs(t).max(1.0) {
            return Err(SimError::StepUnderflow { t, h: step });
        }
        let mut failed = false;
        for s in 1..7 {
            for j in 0..d {
                let mut acc = x[j];
                for (m, a) in A[s][..s].iter().enumerate() {
                    acc += step * a * k[m][j];
                }
                stage[j] = acc;
            }
            let (_, tail) = k.split_at_mut(s);
            match rhs.eval(t + C[s] * step, &stage, &mut tail[0]) {
                Ok(()) => {}
                Err(SimError::NonFinite { .. }) => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let e_norm = if failed {
            f64::INFINITY
        } else {
            // The last stage is evaluated at the fifth-order solution.
            x_new.copy_from_slice(&stage);
            for j in 0..d {
                err[j] = step * E.iter().zip(&k).map(|(e, kk)| e * kk[j]).sum::<f64>();
            }
            scaled_norm(&err, &x, &x_new, rtol, atol)
        };
        steps += 1;
        if e_norm <= 1.0 {
            t = if landing { target } else { t + step };
            x.copy_from_slice(&x_new);
            check_state(t, &x, opts.blowup_bound)?;
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            traj.meta.steps_accepted += 1;
            if landing {
                next_stop += 1;
            }
            if landing || store_every_step {
                traj.push(t, &x, &k[0]);
            }
            let fac = if e_norm == 0.0 { FAC_MAX } else { (SAFETY * math::pow(e_norm, -0.2)).clamp(FAC_MIN, FAC_MAX) };
            // A shortened landing step says nothing about the natural size.
            h = if landing { h.max(step * fac) } else { step * fac };
        } else {
            traj.meta.steps_rejected += 1;
            let fac = if e_norm.is_finite() { (SAFETY * math::pow(e_norm, -0.2)).clamp(FAC_MIN, 1.0) } else { FAC_MIN };
            h = step * fac;
        }
    }
    traj.meta.field_evaluations = rhs.evals;
    Ok(traj)
}
