use anyhow::Result;
use sno_core::evalbench::{runtime_bench, timer_resolution, BenchMethod};

use super::{create_dir, write};
use crate::manifest::{self, RunManifest};
use crate::BenchArgs;

#[derive(serde::Serialize)]
struct Resolved<'a> {
    sizes: &'a [usize],
    degree: usize,
    reps: usize,
    methods: &'a [String],
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<BenchMethod>())
        .collect::<sno_core::Result<Vec<_>>>()?;
    create_dir(&args.out)?;
    let mut m = RunManifest::new("bench", &args.out);
    m.resolved(&Resolved { sizes: &args.sizes, degree: args.degree, reps: args.reps, methods: &args.methods })?;
    m.write(&manifest::in_dir(&args.out))?;

    // the timed kernels are single threaded; nothing else runs meanwhile
    let reports = runtime_bench(&methods, &args.sizes, args.degree, args.reps)?;
    let mut csv = String::new();
    let mut summary = format!(
        "degree = {}\nreps = {}\ntimer_resolution_s = {:e}\n",
        args.degree,
        args.reps,
        timer_resolution().as_secs_f64()
    );
    for (i, r) in reports.iter().enumerate() {
        csv.push_str(&r.csv_rows(i == 0));
        summary.push_str(&format!("[\"{}\"]\nslope = {:.4}\n", r.method.name(), r.slope));
    }
    write(&args.out.join("bench.csv"), &csv)?;
    write(&args.out.join("summary.toml"), &summary)?;
    print!("{csv}");
    for r in &reports {
        println!("# {} log-log slope {:.3}", r.method.name(), r.slope);
    }
    Ok(())
}
