//! Acceptance gate: runs each criterion and prints one PASS/FAIL line.
//! Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use symplectic_polar::random::{
    gaussian_matrix, nondegenerate, positive_definite, rng, valid_channel, valid_channel_with_det_sign,
};
use symplectic_polar::*;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!("{}; {:.2}s", out.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed > limit {
            out.ok = false;
            out.detail = format!("{} exceeds {}s", out.detail, limit.as_secs());
        }
    }
    out
}

fn perturbed_d(n: usize, r: &mut rand_chacha::ChaCha8Rng) -> Matrix64 {
    let g: Matrix64 = gaussian_matrix(n, r).unwrap();
    &signature_matrix::<f64>(n).unwrap() + &g.scale(0.3)
}

fn max_structure(rep: &VerifyReport<f64>) -> f64 {
    rep.structure.iter().map(|s| s.1).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let (mut worst_res, mut worst_det, mut fails) = (0.0_f64, 0.0_f64, 0);
    for n in 1..=4 {
        let mut r = rng(1000 + n as u64);
        for _ in 0..200 {
            let x: Matrix64 = nondegenerate(n, &mut r).unwrap();
            let y = associated_skew_hamiltonian(&x);
            let xn = x.norm_fro();
            let res = check_structure(&y, StructureKind::SkewHamiltonian, &tol()).residual / (1.0 + xn * xn);
            let dx = x.determinant();
            let rel = (y.determinant() - dx * dx).abs() / (dx * dx);
            worst_res = worst_res.max(res);
            worst_det = worst_det.max(rel);
            if res > 1e-10 || rel > 1e-8 {
                fails += 1;
            }
        }
    }
    outcome(fails == 0, format!("800 inputs, worst scaled residual {worst_res:.2e}, worst det mismatch {worst_det:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut r = rng(2000);
    let (mut accepted, mut drawn, mut fails) = (0, 0, 0);
    let (mut worst_rec, mut worst_struct, mut worst_m) = (0.0_f64, 0.0_f64, 0.0_f64);
    while accepted < 200 {
        let n = 1 + drawn % 4;
        drawn += 1;
        let x: Matrix64 = nondegenerate(n, &mut r).unwrap();
        let class = classify_skew_hamiltonian_eigenvalues(&associated_skew_hamiltonian(&x), &tol()).unwrap();
        if class.has_zero || class.has_negative_real {
            continue;
        }
        accepted += 1;
        match decompose(&x, Variant::MS, &tol()) {
            Ok(f) => {
                let rep = verify(&x, &f, &tol()).unwrap();
                let m = check_structure(&f.factors[0].matrix, StructureKind::SkewHamiltonian, &tol()).residual;
                worst_rec = worst_rec.max(rep.reconstruction_residual);
                worst_struct = worst_struct.max(max_structure(&rep));
                worst_m = worst_m.max(m);
                if rep.reconstruction_residual > 1e-8 || max_structure(&rep) > 1e-8 || m > 1e-8 {
                    fails += 1;
                }
            }
            Err(_) => fails += 1,
        }
    }
    outcome(
        fails == 0,
        format!(
            "200 of {drawn} drawn, {fails} failures, worst reconstruction {worst_rec:.2e}, structure {worst_struct:.2e}, M {worst_m:.2e}"
        ),
    )
}

/// Inputs shared by criteria 3 and 4: per n, alternately Gaussian and `D + 0.3 G`.
fn ht_inputs() -> Vec<Matrix64> {
    let mut out = Vec::new();
    for n in 1..=3 {
        let mut r = rng(3000 + n as u64);
        for i in 0..100 {
            out.push(if i % 2 == 0 { nondegenerate(n, &mut r).unwrap() } else { perturbed_d(n, &mut r) });
        }
    }
    out
}

fn criterion_3(inputs: &[Matrix64]) -> Outcome {
    let (mut fails, mut negative) = (0, 0);
    let (mut worst_h, mut worst_t, mut worst_rec) = (0.0_f64, 0.0_f64, 0.0_f64);
    for x in inputs {
        let class = classify_skew_hamiltonian_eigenvalues(&associated_skew_hamiltonian(x), &tol()).unwrap();
        if class.has_negative_real {
            negative += 1;
        }
        match decompose(x, Variant::HT, &tol()) {
            Ok(f) => {
                let h = check_structure(&f.factors[0].matrix, StructureKind::Hamiltonian, &tol()).residual;
                let t = check_structure(&f.factors[1].matrix, StructureKind::AntiSymplectic, &tol()).residual;
                let rec = verify(x, &f, &tol()).unwrap().reconstruction_residual;
                worst_h = worst_h.max(h);
                worst_t = worst_t.max(t);
                worst_rec = worst_rec.max(rec);
                if h > 1e-7 || t > 1e-7 || rec > 1e-7 {
                    fails += 1;
                }
            }
            Err(_) => fails += 1,
        }
    }
    outcome(
        fails == 0 && negative >= 20,
        format!(
            "{} inputs ({negative} with negative real eigenvalues), {fails} failures, worst H {worst_h:.2e}, T {worst_t:.2e}, reconstruction {worst_rec:.2e}",
            inputs.len()
        ),
    )
}

/// Whether the eigenvalue-sign precondition of `v` holds for `x`.
fn precondition_holds(x: &Matrix64, v: Variant) -> bool {
    let y = match v {
        Variant::AS | Variant::ADS | Variant::MS | Variant::MDS => associated_skew_hamiltonian(x),
        _ => associated_skew_hamiltonian_left(x),
    };
    let c = classify_skew_hamiltonian_eigenvalues(&y, &tol()).unwrap();
    match v {
        Variant::RDS | Variant::SDR => true,
        Variant::AS | Variant::SA | Variant::MS | Variant::SM => !c.has_zero && !c.has_negative_real,
        _ => !c.has_zero && !c.has_positive_real,
    }
}

fn criterion_4(inputs: &[Matrix64]) -> Outcome {
    let variants = [Variant::RDS, Variant::SDR, Variant::AS, Variant::ADS, Variant::SA, Variant::SDA];
    let (mut runs, mut fails, mut worst) = (0, 0, 0.0_f64);
    for x in inputs {
        for v in variants {
            let holds = precondition_holds(x, v);
            match decompose(x, v, &tol()) {
                Ok(f) => {
                    runs += 1;
                    let rep = verify(x, &f, &tol()).unwrap();
                    worst = worst.max(rep.reconstruction_residual).max(max_structure(&rep));
                    if !holds || !rep.ok || rep.reconstruction_residual > 1e-8 || max_structure(&rep) > 1e-8 {
                        fails += 1;
                    }
                }
                Err(Error::PreconditionViolated(Precondition::SpectrumSign { .. })) if !holds => {}
                Err(_) => fails += 1,
            }
        }
    }
    let mut r = rng(4000);
    let mut swap_fails = 0;
    for i in 0..100 {
        let n = 1 + i % 4;
        let x: Matrix64 = if i % 2 == 0 { nondegenerate(n, &mut r).unwrap() } else { perturbed_d(n, &mut r) };
        let xd = &x * &signature_matrix::<f64>(n).unwrap();
        let a = classify_real_eigenvalues(&associated_skew_hamiltonian(&x), &tol()).unwrap();
        let b = classify_real_eigenvalues(&associated_skew_hamiltonian(&xd), &tol()).unwrap();
        if a.has_zero != b.has_zero || a.has_negative_real != b.has_positive_real || a.has_positive_real != b.has_negative_real {
            swap_fails += 1;
        }
    }
    outcome(
        fails == 0 && swap_fails == 0,
        format!("{runs} successful runs, {fails} failures, worst residual {worst:.2e}; D-reflection swap failures {swap_fails}/100"),
    )
}

fn criterion_5() -> Outcome {
    let mut r = rng(5000);
    let (mut worst_assoc, mut worst_min, mut identity_fails, mut fails) = (0.0_f64, f64::INFINITY, 0, 0);
    for i in 0..100 {
        let n = 1 + i % 3;
        let a: Channel64 = valid_channel(n, &mut r).unwrap();
        let b: Channel64 = valid_channel(n, &mut r).unwrap();
        let c: Channel64 = valid_channel(n, &mut r).unwrap();
        let id = Channel64::identity(n).unwrap();
        if compose(&a, &id).unwrap() != a || compose(&id, &a).unwrap() != a {
            identity_fails += 1;
        }
        let lhs = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        let rhs = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let d = lhs.max_abs_diff(&rhs);
        worst_assoc = worst_assoc.max(d);
        let m = validate_channel(&compose(&a, &b).unwrap(), &tol()).unwrap().min_eigenvalue;
        worst_min = worst_min.min(m);
        if d > 1e-12 || m < -1e-9 {
            fails += 1;
        }
    }
    outcome(
        fails == 0 && identity_fails == 0,
        format!(
            "identity law failures {identity_fails}, worst associativity {worst_assoc:.2e}, smallest composed min_eigenvalue {worst_min:.3e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut r = rng(6000);
    let (mut worst, mut fails, mut mismatched) = (0.0_f64, 0, 0);
    for _ in 0..100 {
        let k: Matrix64 = gaussian_matrix(1, &mut r).unwrap();
        let y = associated_skew_hamiltonian_left(&k);
        let det = k.determinant();
        let res = (&y - &Matrix64::identity(1).unwrap().scale(det)).norm_fro() / (1.0 + k.norm_fro().powi(2));
        worst = worst.max(res);
        if res > 1e-12 {
            fails += 1;
        }
        let class = classify_channel(&k, &tol()).unwrap();
        let expected = if det > 0.0 { CanonicalCase::AForm } else { CanonicalCase::DAForm };
        let label = if det > 0.0 { "B)-C)" } else { "D)" };
        if class.auto_case() != Some(expected) || class.one_mode_class(1) != Some(label) {
            mismatched += 1;
        }
    }
    outcome(fails == 0 && mismatched == 0, format!("worst scaled residual {worst:.2e}, case mismatches {mismatched}/100"))
}

fn criterion_7() -> Outcome {
    let (mut runs, mut fails, mut worst_rec, mut worst_core) = (0, 0, 0.0_f64, 0.0_f64);
    for n in 1..=3 {
        let mut r = rng(7000 + n as u64);
        for i in 0..50 {
            let c: Channel64 = valid_channel_with_det_sign(n, i % 2 == 0, &mut r).unwrap();
            for request in [CaseRequest::Auto, CaseRequest::Case(CanonicalCase::DRForm)] {
                runs += 1;
                let nf = match normal_form(&c, request, &tol()) {
                    Ok(nf) => nf,
                    Err(_) => {
                        fails += 1;
                        continue;
                    }
                };
                let core = check_structure(&nf.core_factor, nf.case.core_kind(), &tol()).residual;
                let dn = signature_matrix::<f64>(n).unwrap();
                let shape = match nf.case {
                    CanonicalCase::AForm => nf.canonical.k.max_abs_diff(&nf.core_factor),
                    _ => nf.canonical.k.max_abs_diff(&(&dn * &nf.core_factor)),
                };
                let l_zero = nf.canonical.l.as_dvector().iter().all(|&v| v == 0.0);
                let lam = nf.canonical.alpha.as_dmatrix();
                let paired = (0..2 * n).all(|p| {
                    (0..2 * n).all(|q| p == q || lam[(p, q)] == 0.0) && (p >= n || lam[(p, p)] == lam[(p + n, p + n)])
                });
                worst_rec = worst_rec.max(nf.reconstruction_residual);
                worst_core = worst_core.max(core);
                if !l_zero || !paired || shape != 0.0 || core > 1e-8 || nf.reconstruction_residual > 1e-8 {
                    fails += 1;
                }
            }
        }
    }
    outcome(fails == 0, format!("{runs} runs, {fails} failures, worst core residual {worst_core:.2e}, reconstruction {worst_rec:.2e}"))
}

fn criterion_8() -> Outcome {
    let (mut fails, mut worst) = (0, [0.0_f64; 3]);
    for n in 1..=4 {
        let mut r = rng(8000 + n as u64);
        for _ in 0..100 {
            let alpha: Matrix64 = positive_definite(n, &mut r).unwrap();
            let Ok(w) = williamson(&alpha, &tol()) else {
                fails += 1;
                continue;
            };
            let s = w.s.as_dmatrix();
            let diag = (s.transpose() * alpha.as_dmatrix() * s - w.lambda.as_dmatrix()).norm() / alpha.norm_fro();
            let symp = check_structure(&w.s, StructureKind::Symplectic, &tol()).residual;
            let ja = symplectic_form::<f64>(n).unwrap().as_dmatrix() * alpha.as_dmatrix();
            let mut mags: Vec<f64> = ja.complex_eigenvalues().iter().map(|z| z.norm()).collect();
            mags.sort_by(|a, b| b.total_cmp(a));
            let nu_err = (0..n).map(|k| (mags[2 * k] - w.nu[k]).abs().max((mags[2 * k + 1] - w.nu[k]).abs())).fold(0.0, f64::max);
            worst = [worst[0].max(diag), worst[1].max(symp), worst[2].max(nu_err)];
            if diag > 1e-9 || symp > 1e-9 || nu_err > 1e-8 {
                fails += 1;
            }
        }
    }
    outcome(
        fails == 0,
        format!("400 inputs, worst diagonal {:.2e}, symplectic {:.2e}, nu {:.2e}", worst[0], worst[1], worst[2]),
    )
}

fn criterion_9() -> Outcome {
    let mut fails = 0;
    for n in 1..=10 {
        let p = parameter_counts(n).unwrap();
        let expected = (4 * n * n, n * (2 * n + 1), n * (2 * n - 1), n * (2 * n - 1), n * (2 * n + 1));
        if (p.general, p.symplectic, p.canonical_core, p.skew_symmetric, p.symmetric) != expected {
            fails += 1;
        }
    }
    outcome(fails == 0, format!("n = 1..10, {fails} mismatches"))
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    let d = signature_matrix::<f64>(1).unwrap();
    let ms_ok = match decompose(&d, Variant::MS, &tol()) {
        Err(Error::PreconditionViolated(Precondition::SpectrumSign { forbidden, eigenvalues, .. })) => {
            notes.push(format!("MS on D: {forbidden} eigenvalues {eigenvalues:?}"));
            forbidden == SpectrumSign::NonPositive && eigenvalues.iter().all(|&e| (e + 1.0).abs() < 1e-12)
        }
        other => {
            notes.push(format!("MS on D: unexpected {other:?}"));
            false
        }
    };
    let c = Channel64::new(Matrix64::identity(1).unwrap(), Vector64::zeros(1).unwrap(), Matrix64::identity(1).unwrap())
        .unwrap();
    let nf_ok = match normal_form(&c, CaseRequest::Case(CanonicalCase::DAForm), &tol()) {
        Err(Error::PreconditionViolated(Precondition::CaseInadmissible { forbidden, eigenvalues, .. })) => {
            notes.push(format!("DAForm on identity channel: {forbidden} eigenvalues {eigenvalues:?}"));
            forbidden == SpectrumSign::NonNegative && !eigenvalues.is_empty()
        }
        other => {
            notes.push(format!("DAForm on identity channel: unexpected {other:?}"));
            false
        }
    };
    outcome(ms_ok && nf_ok, notes.join("; "))
}

fn main() {
    let inputs = ht_inputs();
    let results = [
        ("1 associated skew-Hamiltonian", timed(Some(Duration::from_secs(5)), criterion_1)),
        ("2 MS decomposition", timed(Some(Duration::from_secs(30)), criterion_2)),
        ("3 HT decomposition", timed(Some(Duration::from_secs(60)), || criterion_3(&inputs))),
        ("4 variant cross-consistency", timed(None, || criterion_4(&inputs))),
        ("5 channel monoid", timed(None, criterion_5)),
        ("6 one-mode identity", timed(None, criterion_6)),
        ("7 channel normal forms", timed(Some(Duration::from_secs(60)), criterion_7)),
        ("8 Williamson form", timed(None, criterion_8)),
        ("9 parameter counts", timed(None, criterion_9)),
        ("10 failure reporting", timed(None, criterion_10)),
    ];
    let mut all = true;
    for (name, out) in &results {
        all &= out.ok;
        println!("{} criterion {name}: {}", if out.ok { "PASS" } else { "FAIL" }, out.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
