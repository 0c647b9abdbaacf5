use std::fs;
use std::io::Write;

use paradox_core::analysis::{analyze, compare_graph, drop_isolates, theory_summary, write_node_csv};
use paradox_core::degree::{
    edge_end, fit_mean_var, make_power_law_cutoff, make_poisson, DegreeDistribution, DEFAULT_TAIL_TOL,
};
use paradox_core::gfp::{gfp_delta_transform, sample_attributes};
use paradox_core::graph::load_edge_list;
use paradox_core::maxent::gamma_for_r;
use paradox_core::poisson::{poisson_delta_pmf, poisson_delta_sign_fractions, DEFAULT_DELTA_TAIL_TOL};
use paradox_core::sampler::{sample_configuration, sample_degree_correlated, sample_poisson_rg};
use paradox_core::transform::{config_delta_transform, correlated_delta_transform, invert_with_kernel};
use paradox_core::{AttributeModel, DensityGrid, GridSpec, Kernel, MaxEntModel, NodeAttributes, TransformFn};
use serde_json::json;

use crate::args::{AnalyzeArgs, AttributeArgs, Common, CompareArgs, DegreeArgs, SampleModel, TheoryModel};
use crate::error::CliError;
use crate::output::OutDir;

fn kernel(c: &Common) -> Result<Kernel, CliError> {
    Ok(Kernel::new(c.kernel.into(), c.bandwidth)?)
}

fn grid(c: &Common, f: &TransformFn, kernel: &Kernel) -> Result<GridSpec, CliError> {
    match &c.grid {
        Some(s) => Ok(s.parse()?),
        None => Ok(GridSpec::auto(f, kernel)),
    }
}

fn degree_tol(c: &Common) -> f64 {
    c.tail_tol.unwrap_or(DEFAULT_TAIL_TOL)
}

fn degrees(d: &DegreeArgs, c: &Common, out: &mut OutDir) -> Result<DegreeDistribution, CliError> {
    if let Some(path) = &d.degrees {
        let bytes = out.read_input(path)?;
        return Ok(DegreeDistribution::read_csv(&bytes[..])?);
    }
    match (d.mean, d.var, d.alpha, d.beta) {
        (Some(m), Some(v), None, None) => Ok(fit_mean_var(m, v)?.distribution(degree_tol(c))?),
        (None, None, Some(a), Some(b)) => Ok(make_power_law_cutoff(a, b, degree_tol(c))?),
        _ => Err(CliError::param("give --degrees FILE, --mean and --var, or --alpha and --beta")),
    }
}

fn attribute_model(a: &AttributeArgs, out: &mut OutDir) -> Result<AttributeModel, CliError> {
    let model = match &a.attr_model {
        Some(path) => {
            let bytes = out.read_input(path)?;
            serde_json::from_slice(&bytes)
                .map_err(|e| CliError::input(format!("bad attribute model {}: {e}", path.display())))?
        }
        None => AttributeModel::GaussianLinear { intercept: a.intercept, slope: a.slope, noise_sd: a.noise_sd },
    };
    model.validate()?;
    Ok(model)
}

fn maxent(p: &DegreeDistribution, r: f64) -> Result<MaxEntModel, CliError> {
    Ok(gamma_for_r(&edge_end(p), r)?)
}

fn write_density(out: &mut OutDir, density: &DensityGrid) -> Result<(), CliError> {
    out.write("density.csv", |w| density.write_csv(w))?;
    out.write("density.json", |w| density.write_metadata_json(w))
}

/// Inverts `f` and writes the density and the transform-derived summary.
fn transform_outputs(
    out: &mut OutDir,
    model: &str,
    f: &TransformFn,
    common: &Common,
) -> Result<(), CliError> {
    let k = kernel(common)?;
    let density = invert_with_kernel(f, &k, &grid(common, f, &k)?);
    write_density(out, &density)?;
    let s = theory_summary(f);
    let mut warnings = s.warnings.clone();
    warnings.extend(density.meta.warnings.iter().cloned());
    out.write_json(
        "summary.json",
        &json!({
            "model": model,
            "method": "transform",
            "mean": s.mean,
            "var": s.var,
            "prob_delta_pos": s.prob_delta_pos,
            "prob_delta_neg": s.prob_delta_neg,
            "frac_delta_neg": s.prob_delta_neg,
            "warnings": warnings,
        }),
    )
}

pub fn theory(model: &TheoryModel, out_dir: &mut Option<OutDir>) -> Result<&'static str, CliError> {
    match model {
        TheoryModel::Poisson { lambda, via_transform, bin_width, common } => {
            let out = out_dir.insert(OutDir::create(&common.out)?);
            if *via_transform {
                let p = make_poisson(*lambda, degree_tol(common))?;
                out.write("degree.csv", |w| p.write_csv(w))?;
                transform_outputs(out, "poisson", &config_delta_transform(&p), common)?;
            } else {
                let tol = common.tail_tol.unwrap_or(DEFAULT_DELTA_TAIL_TOL);
                let dist = poisson_delta_pmf(*lambda, tol)?;
                let signs = poisson_delta_sign_fractions(*lambda, tol)?;
                let atoms = TransformFn::from_atoms(dist.points())?;
                let k = kernel(common)?;
                let density = invert_with_kernel(&atoms, &k, &grid(common, &atoms, &k)?);
                write_density(out, &density)?;
                out.write("atoms.csv", |w| dist.write_csv(w))?;
                let bins = dist.histogram(*bin_width)?;
                out.write("histogram.csv", |w| {
                    writeln!(w, "center,prob")?;
                    for (c, p) in &bins {
                        writeln!(w, "{c},{p:e}")?;
                    }
                    Ok(())
                })?;
                out.write_json(
                    "summary.json",
                    &json!({
                        "model": "poisson",
                        "method": "exact",
                        "mean": dist.mean(),
                        "var": dist.variance(),
                        "prob_delta_pos": signs.positive,
                        "prob_delta_neg": signs.negative,
                        "prob_delta_zero": signs.zero,
                        "frac_delta_neg": signs.negative,
                        "captured_mass": signs.captured,
                        "warnings": density.meta.warnings,
                    }),
                )?;
            }
            Ok("theory poisson")
        }
        TheoryModel::Config { degrees: d, common } => {
            let out = out_dir.insert(OutDir::create(&common.out)?);
            let p = degrees(d, common, out)?;
            out.write("degree.csv", |w| p.write_csv(w))?;
            transform_outputs(out, "config", &config_delta_transform(&p), common)?;
            Ok("theory config")
        }
        TheoryModel::Maxent { degrees: d, r, common } => {
            let out = out_dir.insert(OutDir::create(&common.out)?);
            let p = degrees(d, common, out)?;
            let model = maxent(&p, *r)?;
            out.write("degree.csv", |w| p.write_csv(w))?;
            out.write("maxent.json", |w| model.write_json(w))?;
            let f = correlated_delta_transform(&p, &model.joint())?;
            transform_outputs(out, "maxent", &f, common)?;
            Ok("theory maxent")
        }
        TheoryModel::Gfp { degrees: d, r, attributes, common } => {
            let out = out_dir.insert(OutDir::create(&common.out)?);
            let p = degrees(d, common, out)?;
            let attr = attribute_model(attributes, out)?;
            let model = maxent(&p, *r)?;
            out.write("degree.csv", |w| p.write_csv(w))?;
            out.write("maxent.json", |w| model.write_json(w))?;
            out.write("attribute_model.json", |w| attr.write_json(w))?;
            let f = gfp_delta_transform(&p, &model.joint(), &attr)?;
            transform_outputs(out, "gfp", &f, common)?;
            Ok("theory gfp")
        }
    }
}

pub fn sample(model: &SampleModel, out_dir: &mut Option<OutDir>) -> Result<&'static str, CliError> {
    match model {
        SampleModel::Poisson { lambda, n, common } => {
            let out = out_dir.insert(OutDir::create(&common.out)?);
            let (g, report) = sample_poisson_rg(*n, *lambda, common.seed)?;
            out.write("edges.txt", |w| g.write_edge_list(w))?;
            out.write("sample.json", |w| report.write_json(w))?;
            Ok("sample poisson")
        }
        SampleModel::Config { degrees: d, n, policy, common } => {
            let out = out_dir.insert(OutDir::create(&common.out)?);
            let p = degrees(d, common, out)?;
            let (g, report) = sample_configuration(&p, *n, common.seed, (*policy).into())?;
            out.write("edges.txt", |w| g.write_edge_list(w))?;
            out.write("sample.json", |w| report.write_json(w))?;
            Ok("sample config")
        }
        SampleModel::Maxent { degrees: d, r, m, policy, attributes, attribute_model: a, common } => {
            let out = out_dir.insert(OutDir::create(&common.out)?);
            let p = degrees(d, common, out)?;
            let model = maxent(&p, *r)?;
            let (g, report) = sample_degree_correlated(&model, *m, common.seed, (*policy).into())?;
            out.write("edges.txt", |w| g.write_edge_list(w))?;
            out.write("sample.json", |w| report.write_json(w))?;
            out.write("maxent.json", |w| model.write_json(w))?;
            if *attributes {
                let attr = attribute_model(a, out)?;
                // a separate stream so the graph does not depend on the flag
                let x = sample_attributes(&g, &attr, common.seed.wrapping_add(1))?;
                out.write("attributes.csv", |w| x.write_csv(&g, w))?;
            }
            Ok("sample maxent")
        }
    }
}

pub fn analyze_cmd(args: &AnalyzeArgs, out_dir: &mut Option<OutDir>) -> Result<&'static str, CliError> {
    let out = out_dir.insert(OutDir::create(&args.common.out)?);
    let bytes = out.read_input(&args.edges)?;
    let (raw, load) = load_edge_list(&bytes[..])?;
    let attrs = match &args.attributes {
        Some(path) => {
            let text = out.read_input(path)?;
            Some(NodeAttributes::read_csv(&text[..], &raw)?)
        }
        None => None,
    };
    let (g, attrs, removed) = drop_isolates(&raw, attrs.as_ref())?;
    let (analysis, stats) = analyze(&g, attrs.as_ref(), removed)?;
    let mut summary = serde_json::to_value(&analysis).expect("summary serializes");
    summary["duplicate_edges_dropped"] = json!(load.duplicates);
    summary["self_loops_dropped"] = json!(load.self_loops);
    out.write_json("summary.json", &summary)?;
    out.write("nodes.csv", |w| write_node_csv(&g, &stats, w))?;
    Ok("analyze")
}

pub fn compare_cmd(args: &CompareArgs, out_dir: &mut Option<OutDir>) -> Result<&'static str, CliError> {
    let out = out_dir.insert(OutDir::create(&args.common.out)?);
    let bytes = out.read_input(&args.edges)?;
    let (raw, _) = load_edge_list(&bytes[..])?;
    let (g, _, removed) = drop_isolates(&raw, None)?;
    let c = compare_graph(&g, args.degree_source.into(), removed)?;
    for w in &c.warnings {
        eprintln!("warning: {w}");
    }
    out.write("comparison.json", |w| c.write_json(w))?;
    Ok("compare")
}

/// Fails early when the output path exists and is not a directory.
pub fn check_out(path: &std::path::Path) -> Result<(), CliError> {
    match fs::metadata(path) {
        Ok(m) if !m.is_dir() => Err(CliError::param(format!("{} exists and is not a directory", path.display()))),
        _ => Ok(()),
    }
}
