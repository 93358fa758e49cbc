use std::f64::consts::{FRAC_PI_2, TAU};

use anyhow::{bail, Result};
use maslov_lab::brake::{orbit_index_table, verify_multiplicity_bound};
use maslov_lab::corpus::{brake_corpus, CorpusOptions, DEFAULT_SEED};
use maslov_lab::index::galerkin::TruncationScheme;
use maslov_lab::index::{
    compare_oracles, mean_index_closed_form, omega_index_l, omega_index_periodic, spectral_profile, IndexReport,
};
use maslov_lab::iteration::{
    bott_ledger, check_inequalities, direct_iterate, find_common_index_jump, periodic_identities, precise_ledger,
    Verdict,
};
use maslov_lab::symplectic::{FrameLabel, LagrangianFrame};
use serde_json::json;

use crate::config::RunConfig;
use crate::report::{Outcome, Table};

const FRAMES: [FrameLabel; 2] = [FrameLabel::L0, FrameLabel::L1];

fn unstable(r: &IndexReport) -> usize {
    usize::from(!r.stabilized)
}

pub fn indices(cfg: &RunConfig, scheme: &TruncationScheme) -> Result<Outcome> {
    let coeff = cfg.single()?.coefficient()?;
    let field = coeff.field();
    let n = field.n();
    let mut table = Table::new(&["quantity", "frame", "angle", "index", "nullity", "algorithm"]);
    let (mut violations, mut unstabilized) = (0, 0);

    let mut oracles = Vec::new();
    let mut twisted = Vec::new();
    for label in FRAMES {
        let frame = LagrangianFrame::standard(label, n)?;
        let o = compare_oracles(&field, &frame, scheme)?;
        unstabilized += unstable(&o.galerkin);
        violations += usize::from(!o.agree());
        table.push(vec![
            "i_L".into(),
            format!("{label:?}"),
            String::new(),
            o.galerkin.index.to_string(),
            o.galerkin.nullity.to_string(),
            "galerkin".into(),
        ]);
        for (name, v) in [("winding", o.winding), ("crossing", o.crossing)] {
            if let Some(v) = v {
                table.push(vec!["i_L".into(), format!("{label:?}"), String::new(), v.to_string(), String::new(), name.into()]);
            }
        }
        let t = omega_index_l(&field, &frame, FRAC_PI_2, scheme)?;
        unstabilized += unstable(&t);
        table.push(vec![
            "twisted".into(),
            format!("{label:?}"),
            format!("{FRAC_PI_2}"),
            t.index.to_string(),
            t.nullity.to_string(),
            "galerkin".into(),
        ]);
        oracles.push(o);
        twisted.push(t);
    }

    let points = cfg.scan_points.unwrap_or(12);
    let mut scan = Vec::with_capacity(points);
    for i in 0..points {
        let phi = TAU * i as f64 / points as f64;
        let r = omega_index_periodic(&field, phi, scheme)?;
        unstabilized += unstable(&r);
        table.push(vec![
            "periodic".into(),
            String::new(),
            format!("{phi}"),
            r.index.to_string(),
            r.nullity.to_string(),
            "galerkin".into(),
        ]);
        scan.push(r);
    }
    let profile = spectral_profile(&field, scheme)?;
    let mean = mean_index_closed_form(&profile);
    table.push(vec!["mean".into(), "L0".into(), String::new(), format!("{mean}"), String::new(), "closed form".into()]);
    Ok(Outcome {
        results: json!({
            "n": n,
            "l_indices": oracles,
            "twisted_half_turn": twisted,
            "periodic_scan": scan,
            "profile": profile,
            "mean_index": mean,
        }),
        table,
        violations,
        unstabilized,
    })
}

pub fn iterate(cfg: &RunConfig, scheme: &TruncationScheme) -> Result<Outcome> {
    let coeff = cfg.single()?.coefficient()?;
    let field = coeff.field();
    let k_max = cfg.k_max.unwrap_or(6);
    let mut table = Table::new(&["k", "frame", "index", "nullity", "stabilized"]);
    let mut rows = Vec::new();
    let mut unstabilized = 0;
    for k in 1..=k_max {
        for label in FRAMES {
            let r = direct_iterate(&field, label, k, scheme)?;
            unstabilized += unstable(&r);
            table.push(vec![
                k.to_string(),
                format!("{label:?}"),
                r.index.to_string(),
                r.nullity.to_string(),
                r.stabilized.to_string(),
            ]);
            rows.push(json!({"k": k, "frame": label, "report": r}));
        }
    }
    Ok(Outcome { results: json!({ "rows": rows }), table, violations: 0, unstabilized })
}

pub fn bott_check(cfg: &RunConfig, scheme: &TruncationScheme) -> Result<Outcome> {
    let coeff = cfg.single()?.coefficient()?;
    let field = coeff.field();
    let ks: Vec<usize> = (1..=cfg.k_max.unwrap_or(6)).collect();
    let mut table = Table::new(&["check", "k", "frame", "lhs", "rhs", "holds"]);
    let ledger = bott_ledger(&field, &ks, &FRAMES, scheme)?;
    let mut violations = ledger.violations();
    let unstabilized = ledger.rows.iter().filter(|r| !r.direct_stabilized).count();
    for r in &ledger.rows {
        table.push(vec![
            "iteration".into(),
            r.k.to_string(),
            format!("{:?}", r.frame),
            format!("{:?}", r.direct),
            format!("{:?}", r.predicted),
            r.exact().to_string(),
        ]);
    }
    let identities = periodic_identities(&field, scheme)?;
    for r in &identities {
        violations += usize::from(!r.holds());
        table.push(vec![r.name.into(), String::new(), String::new(), r.lhs.to_string(), r.rhs.to_string(), r.holds().to_string()]);
    }
    let (profile, precise) = precise_ledger(&field, &ks, scheme)?;
    for r in &precise {
        violations += usize::from(!r.exact());
        let holds = if r.formula.resonant { "resonant".to_string() } else { r.exact().to_string() };
        table.push(vec![
            "closed form".into(),
            r.k.to_string(),
            "L0".into(),
            r.direct.to_string(),
            r.formula.value.to_string(),
            holds,
        ]);
    }
    Ok(Outcome {
        results: json!({
            "iteration": ledger,
            "identities": identities,
            "profile": profile,
            "closed_form": precise,
        }),
        table,
        violations,
        unstabilized,
    })
}

pub fn jump(cfg: &RunConfig, scheme: &TruncationScheme) -> Result<Outcome> {
    let systems = cfg.all_systems();
    if systems.is_empty() {
        bail!("`jump` needs at least one system");
    }
    let fields = systems
        .iter()
        .map(|s| Ok(s.coefficient()?.field()))
        .collect::<Result<Vec<_>>>()?;
    let r_max = cfg.r_max.unwrap_or(20);
    let certs = find_common_index_jump(&fields, r_max, scheme, &scheme.finer(4))?;
    let mut table = Table::new(&["r", "system", "m", "verified"]);
    for c in &certs {
        for (j, m) in c.m.iter().enumerate() {
            table.push(vec![c.r.to_string(), (j + 1).to_string(), m.to_string(), c.verified.to_string()]);
        }
    }
    let violations = certs.iter().filter(|c| !c.verified).count();
    Ok(Outcome { results: json!({ "r_max": r_max, "certificates": certs }), table, violations, unstabilized: 0 })
}

pub fn ellipsoid(cfg: &RunConfig, radii: Option<Vec<f64>>, scheme: &TruncationScheme) -> Result<Outcome> {
    let model = match radii {
        Some(r) => maslov_lab::brake::EllipsoidModel::new(r)?,
        None => cfg.single()?.ellipsoid()?,
    };
    let m_max = cfg.m_max_orbits.unwrap_or(20);
    let orbits = model.orbits()?;
    let tab = orbit_index_table(&model, m_max, scheme)?;
    let multiplicity = verify_multiplicity_bound(&model, m_max.min(20), scheme)?;
    let mut violations = tab.mismatches().len() + tab.monotonicity_violations();
    violations += usize::from(!multiplicity.meets_lower_bound || !multiplicity.meets_sharp_bound);
    violations += usize::from(multiplicity.nondegenerate == Some(false));
    let unstabilized = tab.rows.iter().filter(|r| !r.stabilized).count();
    let energies: Vec<f64> = orbits.iter().map(|o| o.action_density(&model)).collect();
    violations += energies.iter().filter(|e| (*e - 2.0).abs() > 1e-10).count();
    let mut table = Table::new(&[
        "orbit", "m", "i_l0", "nu_l0", "i_l1", "nu_l1", "i_periodic", "nu_periodic", "closed_i_l0", "closed_nu_l0", "resonant",
    ]);
    for r in &tab.rows {
        table.push(vec![
            r.orbit.to_string(),
            r.m.to_string(),
            r.i_l0.to_string(),
            r.nu_l0.to_string(),
            r.i_l1.to_string(),
            r.nu_l1.to_string(),
            r.i_periodic.to_string(),
            r.nu_periodic.to_string(),
            r.closed_form.0.to_string(),
            r.closed_form.1.to_string(),
            r.resonant.to_string(),
        ]);
    }
    Ok(Outcome {
        results: json!({
            "model": model,
            "periods": orbits.iter().map(|o| o.period).collect::<Vec<_>>(),
            "action_density": energies,
            "table": tab,
            "multiplicity": multiplicity,
        }),
        table,
        violations,
        unstabilized,
    })
}

pub fn selftest(cfg: &RunConfig, seed: u64, scheme: &TruncationScheme) -> Result<Outcome> {
    let options = CorpusOptions { seed, size: cfg.corpus_size.unwrap_or(6), ..CorpusOptions::default() };
    let corpus = brake_corpus(&options)?;
    let ks: Vec<usize> = (1..=cfg.k_max.unwrap_or(4)).collect();
    let mut table = Table::new(&["system", "n", "check", "checked", "violations"]);
    let mut violations = 0;
    let mut unstabilized = 0;
    let mut systems = Vec::new();
    for e in &corpus {
        let field = e.coefficient.field();
        let n = field.n();
        let mut rows: Vec<(String, usize, usize)> = Vec::new();
        for label in FRAMES {
            let o = compare_oracles(&field, &LagrangianFrame::standard(label, n)?, scheme)?;
            unstabilized += unstable(&o.galerkin);
            rows.push((format!("oracles {label:?}"), 1, usize::from(!o.agree())));
        }
        let ledger = bott_ledger(&field, &ks, &FRAMES, scheme)?;
        rows.push(("iteration".into(), ledger.rows.len(), ledger.violations()));
        let ids = periodic_identities(&field, scheme)?;
        rows.push(("identities".into(), ids.len(), ids.iter().filter(|r| !r.holds()).count()));
        let (_, precise) = precise_ledger(&field, &ks, scheme)?;
        rows.push(("closed form".into(), precise.len(), precise.iter().filter(|r| !r.exact()).count()));
        for r in check_inequalities(&field, None, ks.len(), scheme)? {
            if r.verdict != Verdict::Skipped {
                rows.push((r.name.to_string(), r.checked, r.violations));
            }
        }
        for (check, checked, bad) in &rows {
            violations += bad;
            table.push(vec![e.id.to_string(), n.to_string(), check.clone(), checked.to_string(), bad.to_string()]);
        }
        systems.push(json!({
            "id": e.id,
            "n": n,
            "checks": rows.iter().map(|(c, k, b)| json!({"check": c, "checked": k, "violations": b})).collect::<Vec<_>>(),
        }));
    }
    Ok(Outcome {
        results: json!({ "seed": seed, "default_seed": DEFAULT_SEED, "systems": systems }),
        table,
        violations,
        unstabilized,
    })
}
