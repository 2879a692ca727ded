//! Random DSL sources: contractive base fields and bounded perturbations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::network::{ArrowTypeId, CellId, TypedNetwork};
use crate::rng::{uniform, StreamRng};

/// One representative per input-isomorphism class, with the explicit input
/// arrow types of the representative (each once) and the state dimension of
/// their tails.
fn class_representatives(net: &TypedNetwork) -> Vec<(CellId, Vec<(ArrowTypeId, usize, usize)>)> {
    let classes = net.input_classes();
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for c in net.cells() {
        if seen.contains(&classes[c.index()]) {
            continue;
        }
        seen.push(classes[c.index()]);
        let mut types: Vec<(ArrowTypeId, usize, usize)> = Vec::new();
        for &a in &net.input_arrows(c)[1..] {
            let t = net.arrow_type(a);
            let dim = net.dim(net.tail(a));
            match types.iter_mut().find(|(u, _, _)| *u == t) {
                Some(entry) => {
                    entry.1 = entry.1.min(dim);
                    entry.2 += 1;
                }
                None => types.push((t, dim, 1)),
            }
        }
        out.push((c, types));
    }
    out
}

fn num(v: f64) -> String {
    format!("({v:e})")
}

fn pick(rng: &mut StreamRng, n: usize) -> usize {
    (uniform(rng, 0.0, n as f64) as usize).min(n - 1)
}

fn block(net: &TypedNetwork, c: CellId, comps: &[String]) -> String {
    let rhs = if comps.len() == 1 { comps[0].clone() } else { format!("[{}]", comps.join(", ")) };
    format!("cells \"{}\" {{ dx = {rhs}; }}\n", net.cell_name(c))
}

/// A random field whose every cell relaxes at rate between 1.5 and 2.5
/// while its couplings have total Lipschitz constant at most 0.8, so the
/// field is a contraction in the supremum norm.
pub fn random_contractive_source(net: &TypedNetwork, rng: &mut StreamRng) -> String {
    let mut src = String::new();
    for (c, types) in class_representatives(net) {
        let d = net.dim(c);
        let mut comps = Vec::with_capacity(d);
        for k in 0..d {
            let a = uniform(rng, 1.5, 2.5);
            let mut rhs = format!("-{} * self[{k}] + {}", num(a), num(uniform(rng, -0.5, 0.5)));
            let share = 0.8 / (types.len() + 1) as f64;
            if d > 1 {
                let j = (k + 1) % d;
                rhs.push_str(&format!(" + {} * tanh(self[{j}])", num(share * uniform(rng, -1.0, 1.0))));
            }
            for &(t, dim, count) in &types {
                let name = net.arrow_type_name(t);
                let j = pick(rng, dim);
                let w = share / count as f64 * uniform(rng, -1.0, 1.0);
                let s = uniform(rng, -1.0, 1.0);
                let term = match pick(rng, 3) {
                    0 => format!("sum({name}, u -> tanh(u[{j}] + {}))", num(s)),
                    1 => format!("sum({name}, u -> sin(u[{j}] + {}))", num(s)),
                    _ => format!("{count} * mean({name}, u -> tanh(u[{j}] - {}))", num(s)),
                };
                rhs.push_str(&format!(" + {} * {term}", num(w)));
            }
            comps.push(rhs);
        }
        src.push_str(&block(net, c, &comps));
    }
    src
}

/// A random field of bounded terms whose absolute coefficients sum to at
/// most `eps` in every component, so `eps` bounds its supremum norm. Returns
/// the source and the certified bound.
pub fn random_perturbation_source(net: &TypedNetwork, eps: f64, rng: &mut StreamRng) -> (String, f64) {
    let mut src = String::new();
    let mut bound = 0.0f64;
    for (c, types) in class_representatives(net) {
        let d = net.dim(c);
        let mut comps = Vec::with_capacity(d);
        for k in 0..d {
            let mut coefs: Vec<f64> = (0..3 + 2 * types.len()).map(|_| uniform(rng, -1.0, 1.0)).collect();
            let total: f64 = coefs.iter().map(|v| v.abs()).sum();
            let scale = if total > 0.0 { eps * uniform(rng, 0.5, 0.999) / total } else { 0.0 };
            coefs.iter_mut().for_each(|v| *v *= scale);
            bound = bound.max(coefs.iter().map(|v| v.abs()).sum());
            let j = if d > 1 { (k + 1) % d } else { 0 };
            let mut rhs = format!(
                "{} + {} * tanh(self[{k}] + {}) + {} * sin(2 * self[{j}] + {})",
                num(coefs[0]),
                num(coefs[1]),
                num(uniform(rng, -1.0, 1.0)),
                num(coefs[2]),
                num(uniform(rng, -1.0, 1.0)),
            );
            for (i, &(t, dim, _)) in types.iter().enumerate() {
                let name = net.arrow_type_name(t);
                let j = pick(rng, dim);
                rhs.push_str(&format!(
                    " + {} * mean({name}, u -> tanh(u[{j}] + {})) + {} * mean({name}, u -> sin(u[{j}] - self[{k}]))",
                    num(coefs[3 + 2 * i]),
                    num(uniform(rng, -1.0, 1.0)),
                    num(coefs[4 + 2 * i]),
                ));
            }
            comps.push(rhs);
        }
        src.push_str(&block(net, c, &comps));
    }
    (src, bound)
}
