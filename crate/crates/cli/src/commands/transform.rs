use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use sno_core::polycore::{fit_poly, horner_eval, sumudu_forward, FitOperator, Grid, SampledSignal};

use super::{create_dir, write};
use crate::exit::usage;
use crate::manifest::{self, RunManifest};
use crate::TransformArgs;

/// `(t, f)` from a one-column (implicit `t = 0, 1, ...`) or two-column
/// CSV. A leading all-text row is taken as a header.
fn read_signal(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Option<f64>> = rec.iter().map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite())).collect();
        if i == 0 && parsed.iter().all(Option::is_none) {
            continue;
        }
        let vals: Option<Vec<f64>> = parsed.into_iter().collect();
        let vals = vals.ok_or_else(|| usage(format!("row {}: non-numeric value in {:?}", i + 1, rec.iter().collect::<Vec<_>>())))?;
        rows.push(vals);
    }
    let width = rows.first().map(Vec::len).ok_or_else(|| usage(format!("{} holds no samples", path.display())))?;
    if !(1..=2).contains(&width) || rows.iter().any(|r| r.len() != width) {
        return Err(usage("expected every row to hold one value or a (t, f) pair"));
    }
    Ok(if width == 1 {
        ((0..rows.len()).map(|i| i as f64).collect(), rows.into_iter().map(|r| r[0]).collect())
    } else {
        rows.into_iter().map(|r| (r[0], r[1])).unzip()
    })
}

pub fn transform(args: TransformArgs) -> Result<()> {
    let (t, f) = read_signal(&args.signal)?;
    if let Some(out) = &args.out {
        create_dir(out)?;
        let mut m = RunManifest::new("transform", out);
        m.input("signal", &args.signal)?;
        m.write(&manifest::in_dir(out))?;
    }
    let grid = Grid::new(t)?;
    let fitop = FitOperator::for_grid(&grid, args.degree)?;
    let signal = SampledSignal::new(f);
    let coeffs = fit_poly(&signal, &fitop)?;
    let spectrum = sumudu_forward(&coeffs)?;
    let recon = horner_eval(&coeffs, &grid)?;
    let diffs: Vec<f64> = recon.values.iter().zip(&signal.values).map(|(a, b)| a - b).collect();
    let max_residual = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let rms_residual = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();

    let mut csv = String::from("k,coefficient,spectrum\n");
    for (k, (c, s)) in coeffs.coeffs.iter().zip(&spectrum.scaled_coeffs).enumerate() {
        let _ = writeln!(csv, "{k},{c:e},{s:e}");
    }
    let map = &coeffs.domain_map;
    let summary = format!(
        "points = {}\ndegree = {}\ndomain = [{:e}, {:e}]\nmax_residual = {max_residual:e}\nrms_residual = {rms_residual:e}\n",
        grid.len(),
        args.degree,
        map.lo(),
        map.hi()
    );
    match &args.out {
        Some(out) => {
            write(&out.join("transform.csv"), &csv)?;
            write(&out.join("summary.toml"), &summary)?;
            print!("{csv}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    Ok(())
}
