// Diagnostic report over synthetic corpora: per-scenario channel
// magnitudes, stream correlations, rank tests, and quadrant rates with a
// freshly trained compact model. Useful when retuning generator constants
// or fusion thresholds.

use std::time::Instant;

use dualstream_core::autoencoder::{train, AutoencoderModel, Topology, TrainConfig};
use dualstream_core::fusion::{
    calibrate, fused_health, raw_health, Channel, FusionConfig, Quadrant, RawHealth,
};
use dualstream_core::physics::PhysicsParams;
use dualstream_core::stats::{mann_whitney_u, pearson, spearman};
use dualstream_core::synthgen::{
    generate_corpus, generate_mission, CorpusConfig, MissionSpec, Scenario, PAPER_MASSES,
};
use dualstream_core::telemetry::{Label, Window};
use rand::SeedableRng;

fn scenario_of(mission_id: &str) -> Scenario {
    Scenario::parse(mission_id.split("-m").next().unwrap()).unwrap()
}

fn percentile(values: &mut Vec<f64>, p: f64) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((values.len() - 1) as f64 * p).round() as usize;
    values[idx]
}

fn summarize(name: &str, values: &[f64]) {
    let mut v = values.to_vec();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "    {:<22} n={:<5} mean={:<12.4} p50={:<12.4} p90={:<12.4} max={:.4}",
        name,
        v.len(),
        mean,
        percentile(&mut v, 0.5),
        percentile(&mut v, 0.9),
        percentile(&mut v, 1.0),
    );
}

struct Scored {
    scenario: Scenario,
    label: Option<Label>,
    raw: RawHealth,
}

fn score_windows(windows: &[(Scenario, Window)], model: &AutoencoderModel) -> Vec<Scored> {
    windows
        .iter()
        .map(|(scenario, w)| Scored {
            scenario: *scenario,
            label: w.label,
            raw: raw_health(w, model, &PhysicsParams::new(w.mass)),
        })
        .collect()
}

fn corpus_windows(missions: &[dualstream_core::synthgen::Mission]) -> Vec<(Scenario, Window)> {
    missions
        .iter()
        .flat_map(|m| {
            let s = scenario_of(&m.mission_id);
            m.to_windows().into_iter().map(move |w| (s, w))
        })
        .collect()
}

fn pick(rows: &[Scored], keep: impl Fn(&Scored) -> bool, chan: Channel) -> Vec<f64> {
    rows.iter()
        .filter(|r| keep(r))
        .map(|r| dualstream_core::fusion::channel_value(chan, r.raw.a_ml, &r.raw.proxies))
        .collect()
}

fn main() {
    let t0 = Instant::now();

    // ---- wide corpus: correlation + rank-test fixture ----
    let wide_cfg = CorpusConfig { per_cell: 9, seed: 1000, ..CorpusConfig::default() };
    let wide = generate_corpus(&wide_cfg).unwrap();
    let wide_windows = corpus_windows(&wide);
    println!(
        "wide corpus: {} missions, {} windows ({:.1}s)",
        wide.len(),
        wide_windows.len(),
        t0.elapsed().as_secs_f64()
    );

    // train on cruise windows only
    let train_set: Vec<Window> = wide_windows
        .iter()
        .filter(|(s, _)| *s == Scenario::Cruise)
        .map(|(_, w)| w.clone())
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let model = AutoencoderModel::init(Topology::desk(), &mut rng);
    let config = TrainConfig { epochs: 8, ..TrainConfig::default() };
    let t_train = Instant::now();
    let (model, curve) = train(model, &train_set, &[], &config).unwrap();
    println!(
        "trained desk topology on {} cruise windows, {} epochs in {:.1}s (loss {:.4} -> {:.4})",
        train_set.len(),
        config.epochs,
        t_train.elapsed().as_secs_f64(),
        curve.first().unwrap().train_loss,
        curve.last().unwrap().train_loss,
    );

    let t_score = Instant::now();
    let scored = score_windows(&wide_windows, &model);
    println!(
        "scored {} windows in {:.1}s",
        scored.len(),
        t_score.elapsed().as_secs_f64()
    );

    println!("\nper-scenario raw channels:");
    for scenario in Scenario::ALL {
        println!("  {}:", scenario.as_str());
        for chan in Channel::ALL {
            let vals = pick(&scored, |r| r.scenario == scenario, chan);
            summarize(chan.as_str(), &vals);
        }
    }
    println!("  pothole-labeled windows only:");
    for chan in Channel::ALL {
        let vals = pick(&scored, |r| r.label == Some(Label::Pothole), chan);
        summarize(chan.as_str(), &vals);
    }

    // ---- blind-spot correlations over the whole corpus ----
    let a_ml = pick(&scored, |_| true, Channel::AMl);
    let e_lat = pick(&scored, |_| true, Channel::ELat);
    let w_drive = pick(&scored, |_| true, Channel::WDrive);
    let e_susp = pick(&scored, |_| true, Channel::ESusp);
    let r_lat = pearson(&a_ml, &e_lat).unwrap();
    let r_susp = pearson(&a_ml, &e_susp).unwrap();
    let r_drive = pearson(&a_ml, &w_drive).unwrap();
    println!("\ncorrelations over {} windows:", a_ml.len());
    println!("  pearson(a_ml, e_lat)   = {:+.4}", r_lat);
    println!("  pearson(a_ml, e_susp)  = {:+.4}", r_susp);
    println!("  pearson(a_ml, w_drive) = {:+.4}   (blind-spot gap {:+.4})", r_drive, r_lat - r_drive);

    // ---- rank tests ----
    let normal_susp = pick(&scored, |r| r.label == Some(Label::Normal), Channel::ESusp);
    let pothole_susp = pick(&scored, |r| r.label == Some(Label::Pothole), Channel::ESusp);
    let normal_drive = pick(&scored, |r| r.label == Some(Label::Normal), Channel::WDrive);
    let ramp_drive = pick(&scored, |r| r.label == Some(Label::Ramp), Channel::WDrive);
    let mw_susp = mann_whitney_u(&pothole_susp, &normal_susp).unwrap();
    let mw_drive = mann_whitney_u(&ramp_drive, &normal_drive).unwrap();
    println!("  MWU e_susp pothole vs normal: z={:+.2} p={:.3e}", mw_susp.z, mw_susp.p);
    println!("  MWU w_drive ramp vs normal:   z={:+.2} p={:.3e}", mw_drive.z, mw_drive.p);
    let ramp_aml = pick(&scored, |r| r.label == Some(Label::Ramp), Channel::AMl);
    let normal_aml = pick(&scored, |r| r.label == Some(Label::Normal), Channel::AMl);
    let mw_blind = mann_whitney_u(&ramp_aml, &normal_aml).unwrap();
    println!("  MWU a_ml ramp vs normal:      z={:+.2} p={:.3e} (blind spot wants no excess)", mw_blind.z, mw_blind.p);

    // ---- cruise-heavy composed corpus: correlation fixture candidate ----
    let grid_cfg = CorpusConfig {
        per_cell: 10,
        scenarios: vec![
            Scenario::Cruise,
            Scenario::Pothole,
            Scenario::SpeedBump,
            Scenario::RoughTerrain,
        ],
        seed: 3000,
        ..CorpusConfig::default()
    };
    let ramp_cfg = CorpusConfig {
        per_cell: 2,
        scenarios: vec![Scenario::Ramp],
        seed: 3500,
        ..CorpusConfig::default()
    };
    let mut composed = generate_corpus(&grid_cfg).unwrap();
    composed.extend(generate_corpus(&ramp_cfg).unwrap());
    let composed_windows = corpus_windows(&composed);
    let comp = score_windows(&composed_windows, &model);
    let c_aml = pick(&comp, |_| true, Channel::AMl);
    let c_lat = pick(&comp, |_| true, Channel::ELat);
    let c_drive = pick(&comp, |_| true, Channel::WDrive);
    let cr_lat = pearson(&c_aml, &c_lat).unwrap();
    let cr_drive = pearson(&c_aml, &c_drive).unwrap();
    println!("\ncomposed corpus ({} windows, ramp share {:.1}%):",
        comp.len(),
        100.0 * pick(&comp, |r| r.scenario == Scenario::Ramp, Channel::AMl).len() as f64 / comp.len() as f64);
    println!("  pearson(a_ml, e_lat)   = {:+.4}", cr_lat);
    println!("  pearson(a_ml, w_drive) = {:+.4}   (gap {:+.4})", cr_drive, cr_lat - cr_drive);
    let c_pothole_susp = pick(&comp, |r| r.label == Some(Label::Pothole), Channel::ESusp);
    let c_normal_susp = pick(&comp, |r| r.label == Some(Label::Normal), Channel::ESusp);
    let c_ramp_drive = pick(&comp, |r| r.label == Some(Label::Ramp), Channel::WDrive);
    let c_normal_drive = pick(&comp, |r| r.label == Some(Label::Normal), Channel::WDrive);
    let c_mw_susp = mann_whitney_u(&c_pothole_susp, &c_normal_susp).unwrap();
    let c_mw_drive = mann_whitney_u(&c_ramp_drive, &c_normal_drive).unwrap();
    println!("  MWU e_susp pothole vs normal: z={:+.2} p={:.3e}", c_mw_susp.z, c_mw_susp.p);
    println!("  MWU w_drive ramp vs normal:   z={:+.2} p={:.3e}", c_mw_drive.z, c_mw_drive.p);
    let med = |v: &[f64]| {
        let mut v = v.to_vec();
        percentile(&mut v, 0.5)
    };
    let c_ramp_aml = pick(&comp, |r| r.label == Some(Label::Ramp), Channel::AMl);
    let c_normal_aml = pick(&comp, |r| r.label == Some(Label::Normal), Channel::AMl);
    let c_pothole_aml = pick(&comp, |r| r.label == Some(Label::Pothole), Channel::AMl);
    println!(
        "  median a_ml normal={:.4} ramp={:.4} (ratio {:.3}) pothole={:.4} (ratio {:.3})",
        med(&c_normal_aml),
        med(&c_ramp_aml),
        med(&c_ramp_aml) / med(&c_normal_aml),
        med(&c_pothole_aml),
        med(&c_pothole_aml) / med(&c_normal_aml),
    );

    // ---- matched ramp trios across masses ----
    println!("\nmatched ramps (same seeds/speeds per mass):");
    let mut mass_col = Vec::new();
    let mut drive_col = Vec::new();
    for &mass in PAPER_MASSES.iter() {
        let mut drives = Vec::new();
        for (k, &speed) in [10.0, 12.0, 14.0].iter().enumerate() {
            let spec = MissionSpec::new(Scenario::Ramp, mass, speed, 4200 + k as u64);
            let m = generate_mission(&spec, &format!("trio-{}-{}", mass, k)).unwrap();
            for w in m.to_windows() {
                let r = raw_health(&w, &model, &PhysicsParams::new(mass));
                drives.push(r.proxies.w_drive);
                mass_col.push(mass);
                drive_col.push(r.proxies.w_drive);
            }
        }
        let mean = drives.iter().sum::<f64>() / drives.len() as f64;
        println!("  mass {:>6}: mean w_drive = {:.0} J over {} windows", mass, mean, drives.len());
    }
    println!("  spearman(mass, w_drive) = {:+.4}", spearman(&mass_col, &drive_col).unwrap());

    // ---- narrow-band calibration + quadrant rates ----
    let narrow_cfg = CorpusConfig {
        per_cell: 3,
        speed_range: (11.5, 12.5),
        seed: 2000,
        ..CorpusConfig::default()
    };
    let narrow = generate_corpus(&narrow_cfg).unwrap();
    let narrow_windows = corpus_windows(&narrow);
    let narrow_scored = score_windows(&narrow_windows, &model);
    let rows: Vec<RawHealth> = narrow_scored.iter().map(|s| s.raw.clone()).collect();
    let cal = calibrate(&rows).unwrap();
    println!("\nnarrow calibration over {} windows:", rows.len());
    for chan in Channel::ALL {
        let s = cal.scale(chan);
        println!("    {:<10} min={:<14.4} max={:<14.4} degenerate={}", chan.as_str(), s.min, s.max, s.degenerate);
    }

    let fusion_cfg = FusionConfig::default();
    println!("scored fresh missions (quadrant rates):");
    let mut scored_missions: Vec<(Scenario, Window)> = Vec::new();
    for (i, scenario) in [Scenario::Cruise, Scenario::Pothole, Scenario::Ramp].iter().enumerate() {
        for (j, &mass) in PAPER_MASSES.iter().enumerate() {
            for k in 0..2 {
                let mut spec = MissionSpec::new(
                    *scenario,
                    mass,
                    11.5 + 0.17 * (j * 2 + k) as f64,
                    9000 + (i * 10 + j * 2 + k) as u64,
                );
                spec.duration_s = 120.0;
                let m = generate_mission(&spec, &format!("fresh-{}-{}-{}", scenario.as_str(), mass, k)).unwrap();
                scored_missions.extend(m.to_windows().into_iter().map(|w| (*scenario, w)));
            }
        }
    }
    let fresh = score_windows(&scored_missions, &model);
    for (name, keep) in [
        ("cruise (Normal label)", Box::new(|r: &Scored| r.scenario == Scenario::Cruise && r.label == Some(Label::Normal)) as Box<dyn Fn(&Scored) -> bool>),
        ("pothole (Pothole label)", Box::new(|r: &Scored| r.scenario == Scenario::Pothole && r.label == Some(Label::Pothole))),
        ("pothole (Normal label)", Box::new(|r: &Scored| r.scenario == Scenario::Pothole && r.label == Some(Label::Normal))),
        ("ramp (Ramp label)", Box::new(|r: &Scored| r.scenario == Scenario::Ramp)),
    ] {
        let subset: Vec<&Scored> = fresh.iter().filter(|r| keep(r)).collect();
        let mut counts = [0usize; 4];
        let mut blame = [0usize; 4];
        for r in &subset {
            let h = fused_health(&r.raw, &cal, &fusion_cfg);
            counts[h.quadrant as usize] += 1;
            if h.w_phys_norm >= fusion_cfg.tau_phys {
                let norms = Channel::PHYSICS.map(|c| {
                    dualstream_core::fusion::normalize(
                        dualstream_core::fusion::channel_value(c, 0.0, &r.raw.proxies),
                        c,
                        &cal,
                    )
                });
                let mut arg = 0;
                for (i, n) in norms.iter().enumerate() {
                    if *n > norms[arg] {
                        arg = i;
                    }
                }
                blame[arg] += 1;
            }
        }
        let n = subset.len().max(1);
        println!("  {:<26} n={:<5}", name, subset.len());
        for q in Quadrant::ALL {
            println!(
                "      {:<24} {:>5.1}%",
                q.as_str(),
                100.0 * counts[q as usize] as f64 / n as f64
            );
        }
        println!(
            "      high-phys blame susp/lat/drive/brake: {:?}",
            blame
        );
        let mut aml_norms: Vec<f64> = subset
            .iter()
            .map(|r| fused_health(&r.raw, &cal, &fusion_cfg).a_ml_norm)
            .collect();
        if !aml_norms.is_empty() {
            let (p10, p50) = (percentile(&mut aml_norms, 0.1), percentile(&mut aml_norms, 0.5));
            println!("      a_ml_norm p10={:.3} p50={:.3}", p10, p50);
        }
    }

    // ---- stream latency sketch ----
    let probe = &wide_windows[0].1;
    let paper_model = AutoencoderModel::init(Topology::paper(), &mut rng);
    let t_a = Instant::now();
    for _ in 0..50 {
        std::hint::black_box(paper_model.score(probe));
    }
    let a_us = t_a.elapsed().as_secs_f64() * 1e6 / 50.0;
    let params = PhysicsParams::new(probe.mass);
    let t_b = Instant::now();
    for _ in 0..5000 {
        std::hint::black_box(dualstream_core::physics::physics_vector(probe, &params));
    }
    let b_us = t_b.elapsed().as_secs_f64() * 1e6 / 5000.0;
    println!(
        "\nlatency sketch: stream A {:.0} us/window, stream B {:.2} us/window, ratio {:.3}%",
        a_us,
        b_us,
        100.0 * b_us / a_us
    );

    println!("\ntotal {:.1}s", t0.elapsed().as_secs_f64());
}
