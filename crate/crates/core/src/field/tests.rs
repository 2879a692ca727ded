use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::*;
use crate::fixtures;
use crate::network::{input_isomorphisms, TypedNetwork};
use crate::rng::stream;

const FIG1_LINEAR: &str = "
fn g(a, b) = -a + b;
cells 1, 3 { dx = g(self, sum(magenta, u -> u)); }
cells 2, 4 { dx = g(self, sum(blue, u -> u)); }
";

/// A contractive field touching every aggregate kind, for any network.
fn generic_source(net: &TypedNetwork) -> String {
    let classes = net.input_classes();
    let mut src = String::from("param a = 1.3;\n");
    let mut seen = Vec::new();
    for c in net.cells() {
        if seen.contains(&classes[c.index()]) {
            continue;
        }
        seen.push(classes[c.index()]);
        let mut rhs = String::from("-a * self");
        let mut types: Vec<_> = net.input_arrows(c)[1..].iter().map(|&x| net.arrow_type(x)).collect();
        types.dedup();
        types.sort();
        types.dedup();
        for t in types {
            let name = net.arrow_type_name(t);
            rhs.push_str(&format!(
                " + 0.3 * sum({name}, u -> tanh(u[0] - self[0])) + 0.1 * esym(2, {name}, u -> u[0]) \
                 - 0.05 * psum(3, {name}, u -> sin(u[0])) + 0.1 * mean({name}, u -> prod({name}, v -> cos(v[0] - u[0])))"
            ));
        }
        src.push_str(&format!("cells \"{}\" {{ dx = {rhs}; }}\n", net.cell_name(c)));
    }
    src
}

fn random_state<R: Rng>(net: &TypedNetwork, rng: &mut R) -> Vec<f64> {
    (0..net.layout().total_dim()).map(|_| crate::rng::uniform(rng, -2.0, 2.0)).collect()
}

#[test]
fn zero_field_is_zero() {
    let net = fixtures::fig3();
    let x: Vec<f64> = (0..net.layout().total_dim()).map(|i| i as f64).collect();
    assert!(eval_field(&net, &ZeroField, &x).unwrap().iter().all(|&v| v == 0.0));
    let spec = parse_field("cells c1, c2, c3, c4, c5, c6, c7, c8, c9, c10 { dx = 0 * self; }", &net).unwrap();
    assert!(eval_field(&net, &spec, &x).unwrap().iter().all(|&v| v == 0.0));
}

#[test]
fn fig1_hand_evaluation() {
    let net = fixtures::fig1();
    let spec = parse_field(FIG1_LINEAR, &net).unwrap();
    assert_eq!(eval_field(&net, &spec, &[1.0, 2.0, 3.0, 4.0]).unwrap(), [5.0, 2.0, 3.0, 0.0]);
}

#[test]
fn spec_style_aggregate_names() {
    let net = fixtures::fig1();
    let src = "fn g(a, b) = -a + b;\ncells 1 { dx = g(self, agg_sum(magenta, u -> u)); }\ncells 2 { dx = g(self, agg_sum(blue, u -> u)); }";
    let spec = parse_field(src, &net).unwrap();
    assert_eq!(eval_field(&net, &spec, &[1.0, 2.0, 3.0, 4.0]).unwrap(), [5.0, 2.0, 3.0, 0.0]);
}

#[test]
fn dsl_fields_are_admissible_on_every_fixture() {
    for (name, net) in fixtures::all() {
        let spec = parse_field(&generic_source(&net), &net).unwrap_or_else(|e| panic!("{name}: {e}"));
        let report = check_admissibility(&net, &spec, 1000, 1e-12, &mut stream(7, 0)).unwrap();
        assert!(report.passed(), "{name}: {report:?}");
        assert!(report.comparisons >= 1000);
    }
}

#[test]
fn locality_of_dsl_fields() {
    for (_, net) in fixtures::all() {
        let spec = parse_field(&generic_source(&net), &net).unwrap();
        let layout = net.layout();
        let mut rng = stream(11, 0);
        for _ in 0..1000 {
            let x = random_state(&net, &mut rng);
            let fx = eval_field(&net, &spec, &x).unwrap();
            let c = crate::network::CellId::new(rng.gen_range(0..net.num_cells()));
            let mut inputs: Vec<_> = net.input_arrows(c).iter().map(|&a| net.tail(a)).collect();
            inputs.sort();
            let others: Vec<_> = net.cells().filter(|d| inputs.binary_search(d).is_err()).collect();
            if others.is_empty() {
                continue;
            }
            let d = others[rng.gen_range(0..others.len())];
            let mut y = x.clone();
            layout.cell_mut(&mut y, d).iter_mut().for_each(|v| *v += 1.0);
            let fy = eval_field(&net, &spec, &y).unwrap();
            assert_eq!(layout.cell(&fx, c), layout.cell(&fy, c));
        }
    }
}

#[test]
fn finite_difference_locality() {
    let net = fixtures::fig3();
    let spec = parse_field(&generic_source(&net), &net).unwrap();
    let layout = net.layout();
    let mut rng = stream(12, 0);
    let h = 1e-5;
    for _ in 0..20 {
        let x = random_state(&net, &mut rng);
        let fx = eval_field(&net, &spec, &x).unwrap();
        for j in 0..x.len() {
            let mut y = x.clone();
            y[j] += h;
            let fy = eval_field(&net, &spec, &y).unwrap();
            let moved = net.cells().find(|&c| layout.range(c).contains(&j)).unwrap();
            for c in net.cells() {
                if net.input_arrows(c).iter().any(|&a| net.tail(a) == moved) {
                    continue;
                }
                for k in layout.range(c) {
                    assert!(((fy[k] - fx[k]) / h).abs() <= 1e-7);
                }
            }
        }
    }
}

#[test]
fn symmetrize_fig1_two_term_sum() {
    let net = fixtures::fig1();
    let spec = parse_field("raw cells 1 { phi = input[0]; dir = 1; }", &net).unwrap();
    let f = eval_field(&net, &spec, &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(f, [6.0, 0.0, 6.0, 0.0]);
    let report = check_admissibility(&net, &spec, 1000, 1e-12, &mut stream(3, 0)).unwrap();
    assert!(report.passed());
}

#[test]
fn unsymmetrized_raw_function_fails_admissibility() {
    let net = fixtures::fig1();
    let src = "raw cells 1 { phi = input[0] ^ 2 - input[1]; }";
    let plain = parse_unsymmetrized(src, &net).unwrap();
    let report = check_admissibility(&net, &plain, 100, 1e-12, &mut stream(3, 0)).unwrap();
    assert!(report.max_violation > 1e-3, "{report:?}");
    let sym = parse_field(src, &net).unwrap();
    assert!(check_admissibility(&net, &sym, 1000, 1e-12, &mut stream(3, 0)).unwrap().passed());
}

#[test]
fn symmetrized_raw_functions_are_admissible_on_every_fixture() {
    for (name, net) in fixtures::all() {
        let mut terms: Vec<(crate::network::CellId, Box<dyn RawFunction>, Vec<f64>)> = Vec::new();
        let mut seen = Vec::new();
        for c in net.cells() {
            let class = net.input_classes()[c.index()];
            if seen.contains(&class) {
                continue;
            }
            seen.push(class);
            // Weights each position differently, so φ has no symmetry at all.
            let raw = move |inputs: &[&[f64]]| -> f64 {
                inputs.iter().enumerate().map(|(i, s)| (i as f64 + 1.0) * libm::sin(s[0] * (i as f64 + 0.5))).sum()
            };
            let y: Vec<f64> = (0..net.dim(c)).map(|k| 1.0 - 0.5 * k as f64).collect();
            terms.push((c, Box::new(raw), y));
        }
        let field = symmetrize(&net, terms).unwrap();
        let report = check_admissibility(&net, &field, 1000, 1e-12, &mut stream(5, 0)).unwrap();
        assert!(report.passed(), "{name}: {report:?}");
    }
}

#[test]
fn symmetrize_is_independent_of_propagator() {
    let net = fixtures::fig3();
    let c5 = net.cell_id("c5").unwrap();
    let c6 = net.cell_id("c6").unwrap();
    let src = "raw cells c5 { phi = input[0][0] * exp(input[1][1]) - input[0][1]; }";
    let make = || parse_field(src, &net).unwrap();
    let base = make();
    let x: Vec<f64> = (0..net.layout().total_dim()).map(|i| 0.1 * i as f64 - 0.7).collect();
    let f0 = eval_field(&net, &base, &x).unwrap();
    for beta in input_isomorphisms(&net, c5, c6).unwrap() {
        let terms: Vec<(crate::network::CellId, Box<dyn RawFunction>, Vec<f64>)> = alloc::vec![(
            c5,
            Box::new(|t: &[&[f64]]| t[1][0] * libm::exp(t[2][1]) - t[1][1]) as Box<dyn RawFunction>,
            alloc::vec![1.0],
        )];
        let field = symmetrize(&net, terms).unwrap().with_propagator(&net, &beta);
        let f = eval_field(&net, &field, &x).unwrap();
        for (a, b) in f.iter().zip(&f0) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn symmetric_raw_gives_k_multiple() {
    let net = fixtures::fig1();
    // φ symmetric in the two magenta inputs; |B(1,1)| = 2.
    let spec = parse_field("raw cells 1 { phi = self * (input[0] + input[1]); dir = 1; }", &net).unwrap();
    let x = [0.5, 1.0, -0.25, 3.0];
    let f = eval_field(&net, &spec, &x).unwrap();
    assert_eq!(f[0], 2.0 * 0.5 * 4.0);
    assert_eq!(f[2], 2.0 * -0.25 * 4.0);
}

#[test]
fn symmetrize_is_linear() {
    let net = fixtures::fig3();
    let phi = "input[0][0] * input[1][1] + sin(self)";
    let psi = "exp(input[0][1]) - input[1][0]";
    let f = |p: &str| parse_field(&format!("raw cells c5 {{ phi = {p}; }}"), &net).unwrap();
    let combo = f(&format!("2.5 * ({phi}) + ({psi})"));
    let (fa, fb) = (f(phi), f(psi));
    let mut rng = stream(9, 0);
    for _ in 0..100 {
        let x = random_state(&net, &mut rng);
        let lhs = eval_field(&net, &combo, &x).unwrap();
        let a = eval_field(&net, &fa, &x).unwrap();
        let b = eval_field(&net, &fb, &x).unwrap();
        for i in 0..x.len() {
            assert!((lhs[i] - (2.5 * a[i] + b[i])).abs() <= 1e-12);
        }
    }
}

#[test]
fn raw_zero_gives_zero_field() {
    let net = fixtures::fig1();
    let spec = parse_field("raw cells 2 { phi = 0; }", &net).unwrap();
    assert_eq!(eval_field(&net, &spec, &[1.0, 2.0, 3.0, 4.0]).unwrap(), [0.0; 4]);
}

#[test]
fn wrappers() {
    let net = fixtures::fig1();
    let spec: SharedField = Arc::new(parse_field(FIG1_LINEAR, &net).unwrap());
    let x = [1.0, 2.0, 3.0, 4.0];
    let sum = SumField { parts: alloc::vec![spec.clone(), spec.clone()] };
    assert_eq!(eval_field(&net, &sum, &x).unwrap(), [10.0, 4.0, 6.0, 0.0]);
    let neg = ScaledField { inner: spec.clone(), scale: -1.0 };
    assert_eq!(eval_field(&net, &neg, &x).unwrap(), [-5.0, -2.0, -3.0, -0.0]);
    let col = crate::Coloring::from_named_classes(&net, &[&["1", "3"], &["2", "4"]]).unwrap();
    let q = crate::coloring::quotient_network(&net, &col).unwrap();
    let mapped = MappedField { inner: spec.clone(), map: q.representatives.clone() };
    let y = [1.0, 2.0];
    let fq = eval_field(&q.network, &mapped, &y).unwrap();
    let full = eval_field(&net, &spec, &q.lift_state(&net, &y)).unwrap();
    assert_eq!(q.lift_state(&net, &fq), full);
}

#[test]
fn domain_errors_name_the_cell() {
    let net = fixtures::fig1();
    let spec = parse_field("cells 1 { dx = log(self); }\ncells 2 { dx = self; }", &net).unwrap();
    let err = eval_field(&net, &spec, &[1.0, 1.0, -1.0, 1.0]).unwrap_err();
    assert_eq!(err, FieldError::Domain { cell: crate::CellId::new(2), operation: "log" });
}

#[test]
fn bump_basis_geometry() {
    let params: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let points: Vec<Vec<f64>> = params.iter().map(|&t| alloc::vec![libm::cos(3.0 * t), libm::sin(3.0 * t), t]).collect();
    let seg = CurveSegment::new(params, points).unwrap();
    let one = BumpBasis::along(&seg, 1).unwrap();
    assert_eq!(one.center_params, [1.0]);
    assert_eq!(one.eval(0, &one.centers[0]), one.sup_norm(0));

    let basis = BumpBasis::along(&seg, 5).unwrap();
    assert_eq!(basis.overlapping_pair(), None);
    for n in 0..5 {
        assert_eq!(basis.center_params[n], libm::pow(0.5, n as f64));
        let dist = crate::state::sup_distance(&basis.centers[n], &basis.anchor);
        assert!(dist + basis.radii[n] <= basis.enclosing_radius);
    }
    let mut rng = stream(4, 0);
    let z: Vec<f64> = (0..5).map(|_| crate::rng::uniform(&mut rng, -1.0, 1.0)).collect();
    let f = BumpFunction { basis: basis.clone(), coefficients: z.clone() };
    let mut max_seen: f64 = 0.0;
    for n in 0..5 {
        let c = &basis.centers[n];
        let r = basis.radii[n];
        for i in 0..=20 {
            for j in 0..=20 {
                let p = [c[0] + r * (i as f64 / 10.0 - 1.0), c[1] + r * (j as f64 / 10.0 - 1.0), c[2]];
                let active = (0..5).filter(|&m| basis.eval(m, &p) > 0.0).count();
                assert!(active <= 1);
                max_seen = max_seen.max(f.eval_point(&p).abs());
            }
        }
    }
    assert!((max_seen - f.sup_norm()).abs() <= 1e-15);
    assert!(f.c1_bound() <= 1.0);
}

#[test]
fn bump_errors() {
    let seg = CurveSegment::new(alloc::vec![0.0, 1.0], alloc::vec![alloc::vec![0.0], alloc::vec![1.0]]).unwrap();
    assert_eq!(BumpBasis::along(&seg, 0), Err(BumpError::NoBumps));
    assert!(BumpBasis::along(&seg, 1100).is_err());
    assert!(CurveSegment::new(alloc::vec![0.0], alloc::vec![alloc::vec![0.0]]).is_err());
    let flat = CurveSegment::new(alloc::vec![0.0, 1.0], alloc::vec![alloc::vec![0.0], alloc::vec![0.0]]).unwrap();
    assert!(BumpBasis::along(&flat, 2).is_err());
}

#[test]
fn bump_perturbation_is_admissible_with_diagonal_multiple() {
    // Curve of cell 1's input tuple (x1, x2, x4) with x2 = x4.
    let net = fixtures::fig1();
    let params: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let points: Vec<Vec<f64>> = params.iter().map(|&t| alloc::vec![t, 1.0 - t * t, 1.0 - t * t]).collect();
    let seg = CurveSegment::new(params, points.clone()).unwrap();
    let basis = BumpBasis::along(&seg, 5).unwrap();
    let coefficients = alloc::vec![0.5, -0.3, 0.2, 0.9, -0.7];
    let bump = BumpFunction { basis: basis.clone(), coefficients };
    let c1 = net.cell_id("1").unwrap();
    let field = symmetrize(&net, alloc::vec![(c1, Box::new(bump.clone()) as Box<dyn RawFunction>, alloc::vec![1.0])]).unwrap();
    assert!(check_admissibility(&net, &field, 1000, 1e-12, &mut stream(2, 0)).unwrap().passed());
    for p in basis.centers.iter().chain(points.iter()) {
        let x = [p[0], p[1], 0.0, p[2]];
        let f = eval_field(&net, &field, &x).unwrap();
        assert!((f[0] - 2.0 * bump.eval_point(p)).abs() <= 1e-15);
    }
}
