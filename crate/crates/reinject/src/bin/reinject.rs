//! Command-line harness: level tables, scenario runs, stage comparisons,
//! and distortion measurements on recorded CSV files.

use reinject::analysis::{harmonic_spectrum, thd};
use reinject::control::{recovery_time, sliding_rms, EventKind};
use reinject::converter::{enumerate_states, ConverterParams};
use reinject::csvio::{read_csv, write_csv};
use reinject::error::{Error, Result};
use reinject::scenario::{Scenario, Weighting};
use reinject::sim::{run_simulation, SimOutput};
use reinject::signal::TimeSeries;

const USAGE: &str = "\
reinject — series multi-stage reinjection converter simulator

usage: reinject <command> [options]

commands:
  levels                print the synthesizable level table
  simulate              run a scenario, write waveforms to CSV, print a summary
  compare-stages        run the scenario at several stage counts, compare distortion
  thd <csv> <column>    total harmonic distortion of a recorded column

options:
  --config <path>       scenario config file (defaults apply when omitted)
  --out <path>          CSV output path for simulate (default out.csv)
  --quiet               suppress printed summaries
  --stages <n>          levels: stage count override
  --vdc <volts>         levels: DC-link voltage override
  --sweep               compare-stages: run every count 1..=p instead of {1, p}
  --fundamental <hz>    thd: fundamental frequency (default from config, else 50)
  --hmax <n>            thd: highest harmonic order (default up to 49)
  -h, --help            show this help

exit codes: 0 success, 2 configuration error, 3 simulation or i/o error,
4 analysis error";

struct Options {
    config: Option<String>,
    out: Option<String>,
    quiet: bool,
    stages: Option<usize>,
    vdc: Option<f64>,
    sweep: bool,
    fundamental: Option<f64>,
    hmax: Option<usize>,
    help: bool,
    positionals: Vec<String>,
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let Err(err) = run(&args) {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}

fn run(args: &[String]) -> Result<()> {
    let opts = parse_options(args)?;
    if opts.help {
        println!("{USAGE}");
        return Ok(());
    }
    let command = match opts.positionals.first() {
        Some(c) => c.as_str(),
        None => {
            return Err(Error::config(format!("no command given\n\n{USAGE}")));
        }
    };
    match command {
        "levels" => cmd_levels(&opts),
        "simulate" => cmd_simulate(&opts),
        "compare-stages" => cmd_compare_stages(&opts),
        "thd" => cmd_thd(&opts),
        other => Err(Error::config(format!(
            "unknown command `{other}`\n\n{USAGE}"
        ))),
    }
}

fn parse_options(args: &[String]) -> Result<Options> {
    let mut opts = Options {
        config: None,
        out: None,
        quiet: false,
        stages: None,
        vdc: None,
        sweep: false,
        fundamental: None,
        hmax: None,
        help: false,
        positionals: Vec::new(),
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut value = |flag: &str| -> Result<String> {
            it.next()
                .cloned()
                .ok_or_else(|| Error::config(format!("flag {flag} expects a value")))
        };
        match arg.as_str() {
            "--config" => opts.config = Some(value("--config")?),
            "--out" => opts.out = Some(value("--out")?),
            "--quiet" => opts.quiet = true,
            "--stages" => {
                let v = value("--stages")?;
                opts.stages = Some(v.parse().map_err(|_| {
                    Error::config(format!("--stages expects an integer, got `{v}`"))
                })?);
            }
            "--vdc" => {
                let v = value("--vdc")?;
                opts.vdc = Some(v.parse().map_err(|_| {
                    Error::config(format!("--vdc expects a voltage, got `{v}`"))
                })?);
            }
            "--sweep" => opts.sweep = true,
            "--fundamental" => {
                let v = value("--fundamental")?;
                opts.fundamental = Some(v.parse().map_err(|_| {
                    Error::config(format!("--fundamental expects hertz, got `{v}`"))
                })?);
            }
            "--hmax" => {
                let v = value("--hmax")?;
                opts.hmax = Some(v.parse().map_err(|_| {
                    Error::config(format!("--hmax expects an integer, got `{v}`"))
                })?);
            }
            "-h" | "--help" => opts.help = true,
            flag if flag.starts_with('-') => {
                return Err(Error::config(format!("unknown flag `{flag}`\n\n{USAGE}")));
            }
            _ => opts.positionals.push(arg.clone()),
        }
    }
    Ok(opts)
}

fn load_scenario(opts: &Options) -> Result<Scenario> {
    match &opts.config {
        Some(path) => Scenario::from_file(path),
        None => Ok(Scenario::default()),
    }
}

/// `levels`: the full switching-state table, lowest level first.
fn cmd_levels(opts: &Options) -> Result<()> {
    let base = load_scenario(opts)?;
    let stages = opts.stages.unwrap_or(base.stages);
    let v_dc = opts.vdc.unwrap_or(base.v_dc);
    let params = ConverterParams::new(stages, v_dc)?;
    println!("state  value  voltage_V");
    for row in enumerate_states(&params) {
        println!("{:>5}  {:>5}  {}", row.word.to_string(), row.state_value, row.voltage);
    }
    Ok(())
}

/// `simulate`: run the scenario, write the CSV, print the summary.
fn cmd_simulate(opts: &Options) -> Result<()> {
    let sc = load_scenario(opts)?;
    let out_path = opts.out.clone().unwrap_or_else(|| "out.csv".to_string());
    let output = run_simulation(&sc)?;
    write_csv(&out_path, &output.bundle, &sc.signals)?;
    if !opts.quiet {
        print_summary(&sc, &output, &out_path)?;
    }
    Ok(())
}

fn print_summary(sc: &Scenario, output: &SimOutput, out_path: &str) -> Result<()> {
    let f = sc.grid.frequency_hz;
    let start = sc.analysis_start_cycle as usize;
    let cycles = sc.analysis_cycles as usize;
    println!("scenario        {}", sc.hash());
    println!(
        "samples         {} (dt {} s, duration {} s)",
        output.bundle.samples(),
        sc.dt,
        sc.duration_s
    );
    if let Some(res) = output.bundle.kvl_residual {
        println!("kvl residual    {res:.3e} V (worst midpoint defect)");
    }
    for ph in ["a", "b", "c"] {
        let name = format!("v_load_{ph}_V");
        let series = bundle_series(output, &name)?;
        let spectrum = harmonic_spectrum(series, f, start, cycles, sc.h_max)?;
        let distortion = thd(&spectrum)?;
        println!(
            "{name} thd  {distortion:.4} % (cycles {start}..{}, h <= {})",
            start + cycles,
            sc.h_max
        );
    }
    let vg = window_rms(bundle_series(output, "v_grid_a_V")?, sc)?;
    let vl = window_rms(bundle_series(output, "v_load_a_V")?, sc)?;
    println!("v_grid_a rms    {vg:.1} V over the analysis window");
    println!("v_load_a rms    {vl:.1} V over the analysis window");
    let p_mean = window_mean(bundle_series(output, "p_W")?, sc);
    let q_mean = window_mean(bundle_series(output, "q_var")?, sc);
    println!("p mean          {p_mean:.1} W");
    println!("q mean          {q_mean:.1} var");

    if !sc.events.is_empty() {
        let v_load = bundle_series(output, "v_load_a_V")?;
        let (rms_trace, _) = sliding_rms(v_load, sc.period())?;
        for (n, event) in sc.events.iter().enumerate() {
            let kind = match event.kind {
                EventKind::Sag => "sag",
                EventKind::Swell => "swell",
            };
            let onset_sample = (event.start / sc.dt).floor() as usize;
            if onset_sample == 0 || onset_sample >= rms_trace.len() {
                println!("event[{n}] {kind} {}: outside the record", event.magnitude);
                continue;
            }
            let nominal = rms_trace.values[onset_sample - 1];
            let until = event.end.unwrap_or(sc.duration_s).min(sc.duration_s);
            match recovery_time(&rms_trace, nominal, 0.02, event.start, until) {
                Some(t) => println!(
                    "event[{n}] {kind} {} at {} s: load rms back within 2% in {t:.4} s",
                    event.magnitude, event.start
                ),
                None => println!(
                    "event[{n}] {kind} {} at {} s: load rms does not resettle before {until} s",
                    event.magnitude, event.start
                ),
            }
        }
    }
    println!("wrote           {out_path}");
    Ok(())
}

fn bundle_series<'a>(output: &'a SimOutput, name: &str) -> Result<&'a TimeSeries> {
    output
        .bundle
        .get(name)
        .ok_or_else(|| Error::simulation(format!("run produced no `{name}` signal")))
}

/// RMS over the scenario's analysis window.
fn window_rms(series: &TimeSeries, sc: &Scenario) -> Result<f64> {
    let spc = sc.samples_per_cycle();
    let a = sc.analysis_start_cycle as usize * spc;
    let b = a + sc.analysis_cycles as usize * spc;
    if b > series.len() {
        return Err(Error::analysis(format!(
            "analysis window needs {} samples, record has {}",
            b,
            series.len()
        )));
    }
    let sum: f64 = series.values[a..b].iter().map(|x| x * x).sum();
    Ok((sum / (b - a) as f64).sqrt())
}

/// Mean over the scenario's analysis window (bounds checked by the caller's
/// earlier window_rms on the same record length).
fn window_mean(series: &TimeSeries, sc: &Scenario) -> f64 {
    let spc = sc.samples_per_cycle();
    let a = sc.analysis_start_cycle as usize * spc;
    let b = (a + sc.analysis_cycles as usize * spc).min(series.len());
    let sum: f64 = series.values[a..b].iter().sum();
    sum / (b - a) as f64
}

/// `compare-stages`: same scenario at several stage counts, with the DC link
/// rescaled so every chain spans the same synthesizable range.
fn cmd_compare_stages(opts: &Options) -> Result<()> {
    let base = load_scenario(opts)?;
    let reach = base.synthesizable_peak();
    let counts: Vec<usize> = if opts.sweep {
        (1..=base.stages).collect()
    } else if base.stages == 1 {
        vec![1]
    } else {
        vec![1, base.stages]
    };

    let f = base.grid.frequency_hz;
    let start = base.analysis_start_cycle as usize;
    let cycles = base.analysis_cycles as usize;
    let mut results: Vec<(usize, f64, f64)> = Vec::new();
    for &p in &counts {
        let mut sc = base.clone();
        sc.stages = p;
        let total_ratio = match sc.weighting {
            Weighting::Binary => ((1u64 << p) - 1) as f64,
            Weighting::Identical => p as f64,
        };
        sc.v_dc = 2.0 * reach / total_ratio;
        let output = run_simulation(&sc)?;
        let series = bundle_series(&output, "v_load_a_V")?;
        let spectrum = harmonic_spectrum(series, f, start, cycles, sc.h_max)?;
        results.push((p, sc.v_dc, thd(&spectrum)?));
    }

    if !opts.quiet {
        println!("equal synthesizable range: ±{reach:.1} V");
        println!("stages  v_dc_V      v_load_a_thd_pct");
        for (p, v_dc, distortion) in &results {
            println!("{p:>6}  {v_dc:<10.1}  {distortion:.4}");
        }
        if results.len() > 1 {
            let (p_first, _, thd_first) = results[0];
            let (p_last, _, thd_last) = results[results.len() - 1];
            println!(
                "ratio   thd(p={p_last}) / thd(p={p_first}) = {:.4}",
                thd_last / thd_first
            );
        }
    }
    Ok(())
}

/// `thd <csv> <column>`: distortion of a recorded column over every whole
/// fundamental cycle the record contains.
fn cmd_thd(opts: &Options) -> Result<()> {
    let [_, csv_path, column] = opts.positionals.as_slice() else {
        return Err(Error::config(format!(
            "thd expects a csv path and a column name\n\n{USAGE}"
        )));
    };
    let fundamental = match (opts.fundamental, &opts.config) {
        (Some(f), _) => f,
        (None, Some(path)) => Scenario::from_file(path)?.grid.frequency_hz,
        (None, None) => 50.0,
    };
    let table = read_csv(csv_path)?;
    let series = table.time_series(column)?;
    let spc = 1.0 / (fundamental * series.dt);
    let cycles = (series.len() as f64 / spc).floor() as usize;
    if cycles == 0 {
        return Err(Error::analysis(format!(
            "record spans {} samples, less than one {fundamental} Hz cycle ({spc:.0} samples)",
            series.len()
        )));
    }
    let h_max = opts
        .hmax
        .unwrap_or_else(|| 49usize.min(((spc - 2.0) / 2.0).floor() as usize).max(1));
    let spectrum = harmonic_spectrum(&series, fundamental, 0, cycles, h_max)?;
    let distortion = thd(&spectrum)?;
    if opts.quiet {
        println!("{distortion}");
    } else {
        println!(
            "{column}: thd {distortion:.4} % over {cycles} cycles at {fundamental} Hz (h <= {h_max})"
        );
    }
    Ok(())
}
