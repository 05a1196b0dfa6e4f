//! The `kisin` command line.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kisin_core::hn::{cloud_from_subspaces, hn_filtration, HnOptions};
use kisin_core::kempf::{factor_slopes, is_semistable_subspace, kempf_filtration, kempf_semisimplify, KempfOptions};
use kisin_core::filtered::deg_filtered;
use kisin_core::module::BaseChange;
use kisin_core::polygon::Polygon;
use kisin_core::subspace::{enumerate_all, EnumerationOptions};
use kisin_core::variety::{
    ambient_subspaces, check_slope_range, component_invariant, enumerate_candidate_polygons, enumerate_points, hn_over_hodge,
    point_polygon, semicontinuity, strata, Completeness, HodgeType, VarietyOptions,
};
use kisin_core::Error as CoreError;
use rayon::prelude::*;

use crate::error::{ToolError, ToolResult};
use crate::experiments::{analyze, semistable_pool, tensor_experiment};
use crate::format::{format_vector, KempfFile, ModuleFile};
use crate::literal::format_series;
use crate::report::{csv_text, fmt_polygon, fmt_q, fmt_set, fmt_slopes, svg, Layer};

#[derive(Parser, Debug)]
#[command(name = "kisin", version, about = "Harder-Narasimhan invariants of mod-p Kisin modules")]
pub struct Cli {
    /// Worker threads for enumeration fan-outs (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Module file (`.km`).
    #[arg(long)]
    pub input: PathBuf,
    /// Search for subobjects over F_{q^m}.
    #[arg(long, default_value_t = 1)]
    pub extension: u32,
    /// Target precision for stable subspaces (raised to the safe minimum).
    #[arg(long)]
    pub precision: Option<i64>,
}

impl SearchArgs {
    fn options(&self) -> HnOptions {
        HnOptions {
            enumeration: EnumerationOptions { target_precision: self.precision, ..EnumerationOptions::default() },
            extension: self.extension,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rank, degree, Hodge divisors, HN polygon and semi-stability of a lattice.
    Analyze {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// φ-stable subspaces and the strict subobject cloud.
    Subobjects {
        #[command(flatten)]
        search: SearchArgs,
        /// Only this dimension.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// The HN filtration with its graded pieces.
    Hn {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Tensor products of semi-stable lattices from a seeded pool.
    TensorExperiment {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pool size per coefficient field.
        #[arg(long, default_value_t = 25)]
        pool: usize,
        /// Field sizes.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 3])]
        fields: Vec<u32>,
        /// Write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Semi-stability and Kempf filtration of a subspace of M ⊗ N.
    Kempf {
        /// Kempf file (`.kf`).
        #[arg(long)]
        input: PathBuf,
    },
    /// Points of a Kisin variety, their HN strata and contact sets.
    Variety {
        #[arg(long)]
        input: PathBuf,
        /// Hodge type, e.g. `0,1`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        nu: Vec<i64>,
        /// Cap the lattice window to [-W, W].
        #[arg(long)]
        window: Option<i64>,
        /// Also count points over F_{q^k} for k up to this value.
        #[arg(long, default_value_t = 1)]
        extension: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Candidate HN polygons above Hodge polygons, colored by contact set.
    Figures {
        /// Hodge types separated by `;`, e.g. `0,0,1;-1,0,1`. Defaults to
        /// (0,0,1), (-1,0,1) and (-1,0,0,1).
        #[arg(long, allow_hyphen_values = true)]
        nu: Option<String>,
        #[arg(long, default_value = "figures")]
        out_dir: PathBuf,
    },
    /// The desk-scale property suite, as JSON.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn read(path: &Path) -> ToolResult<String> {
    fs::read_to_string(path).map_err(|e| ToolError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> ToolResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn polygon_rows(p: &Polygon) -> Vec<Vec<String>> {
    p.breakpoints().iter().map(|(x, y)| vec![fmt_q(x), fmt_q(y)]).collect()
}

fn cmd_analyze(s: &SearchArgs, csv: Option<&Path>, svg_out: Option<&Path>, out: &mut dyn Write) -> ToolResult<()> {
    let l = ModuleFile::parse(&read(&s.input)?)?.lattice()?;
    let a = analyze(&l, &s.options())?;
    writeln!(out, "rank: {}", a.rank)?;
    writeln!(out, "degree: {}", fmt_q(&a.degree))?;
    writeln!(out, "slope: {}", fmt_q(&a.slope))?;
    writeln!(out, "hodge divisors: {:?}", a.divisors)?;
    writeln!(out, "hn polygon (normalized): {}", fmt_polygon(&a.normalized))?;
    writeln!(out, "hn polygon (raw, extension {}): {}", s.extension, fmt_polygon(&a.raw))?;
    match a.etale_rank {
        Some(r) => writeln!(out, "etale rank: {r}")?,
        None => writeln!(out, "etale rank: n/a (not effective)")?,
    }
    writeln!(out, "summary: deg {}, slope {}", fmt_q(&a.degree), fmt_q(&a.slope))?;
    if a.semistable {
        writeln!(out, "verdict: semistable, slope {}", fmt_q(&a.slope))?;
    } else {
        let s: Vec<String> = a.graded_slopes.iter().map(fmt_q).collect();
        writeln!(out, "verdict: not semistable, HN slopes [{}]", s.join(", "))?;
    }
    if let Some(path) = csv {
        write_file(path, &csv_text(&["x", "y"], &polygon_rows(&a.normalized))?)?;
    }
    if let Some(path) = svg_out {
        let layer = Layer { polygon: &a.normalized, class: 0, label: "HN".into() };
        write_file(path, &svg("HN polygon", None, &[layer]))?;
    }
    Ok(())
}

fn cmd_subobjects(s: &SearchArgs, dim: Option<usize>, csv: Option<&Path>, out: &mut dyn Write) -> ToolResult<()> {
    let l = ModuleFile::parse(&read(&s.input)?)?.lattice()?;
    let opts = s.options();
    let l = if opts.extension > 1 { l.base_change(BaseChange::Unramified(opts.extension))? } else { l };
    let mut subs = enumerate_all(l.parent(), &opts.enumeration)?;
    if let Some(d) = dim {
        if d > l.rank() {
            return Err(ToolError::Usage(format!("dimension {d} exceeds the rank {}", l.rank())));
        }
        for (k, v) in subs.iter_mut().enumerate() {
            if k != d {
                v.clear();
            }
        }
    }
    let cloud = cloud_from_subspaces(&l, &subs)?;
    let mut rows = Vec::new();
    let mut idx = 0;
    for v in &subs {
        for sub in v {
            let so = &cloud[idx];
            idx += 1;
            let pivots = format!("{:?}", sub.chart.pivots());
            let verified = if sub.verified_prec >= kisin_core::series::EXACT { "exact".to_string() } else { format!("verified to u^{}", sub.verified_prec) };
            writeln!(out, "dim {} pivots {} rank {} deg {} ({verified})", sub.dim(), pivots, so.rank, fmt_q(&so.degree))?;
            for j in 0..sub.dim() {
                let col: Vec<String> = sub.chart.basis().column(j).iter().map(|x| format_series(x, l.field())).collect();
                writeln!(out, "  [{}]", col.join(", "))?;
            }
            rows.push(vec![sub.dim().to_string(), pivots, so.rank.to_string(), so.degree.numer().to_string(), so.degree.denom().to_string()]);
        }
    }
    if let Some(path) = csv {
        write_file(path, &csv_text(&["dim", "pivots", "rank", "deg_num", "deg_den"], &rows)?)?;
    }
    Ok(())
}

fn cmd_hn(s: &SearchArgs, csv: Option<&Path>, svg_out: Option<&Path>, out: &mut dyn Write) -> ToolResult<()> {
    let l = ModuleFile::parse(&read(&s.input)?)?.lattice()?;
    let filt = hn_filtration(&l, &s.options())?;
    writeln!(out, "steps: {}", filt.len())?;
    for (i, step) in filt.steps.iter().enumerate() {
        writeln!(out, "M_{i}: rank {} deg {}", step.rank, fmt_q(&step.degree))?;
    }
    for (i, g) in filt.gradeds()?.iter().enumerate() {
        writeln!(out, "gr_{}: rank {} slope {} divisors {:?}", i + 1, g.rank(), fmt_q(&g.slope()), g.hodge_divisors())?;
    }
    writeln!(out, "polygon: {}", fmt_polygon(&filt.polygon))?;
    writeln!(out, "slopes: {}", fmt_slopes(&filt.polygon))?;
    if let Some(path) = csv {
        write_file(path, &csv_text(&["x", "y"], &polygon_rows(&filt.polygon))?)?;
    }
    if let Some(path) = svg_out {
        let layer = Layer { polygon: &filt.polygon, class: 0, label: "HN".into() };
        let hodge = Polygon::from_unit_slopes(l.hodge_divisors()).scale_down(1.into(), kisin_core::rational::Q::from(l.e() as i64));
        write_file(path, &svg("HN polygon over the Hodge polygon", Some(&hodge), &[layer]))?;
    }
    Ok(())
}

fn cmd_tensor(seed: u64, pool: usize, fields: &[u32], json: Option<&Path>, out: &mut dyn Write) -> ToolResult<()> {
    let opts = HnOptions::default();
    let lattices = semistable_pool(seed, fields, pool, &opts)?;
    let rep = tensor_experiment(&lattices, &opts)?;
    writeln!(out, "pool: {} lattices, pairs: {}, counterexamples: {}", lattices.len(), rep.pairs, rep.counterexamples.len())?;
    for c in &rep.counterexamples {
        writeln!(out, "counterexample ({}):\n{}--\n{}", c.reason, c.left, c.right)?;
    }
    if let Some(path) = json {
        write_file(path, &(serde_json::to_string_pretty(&rep).expect("plain data") + "\n"))?;
    }
    if rep.counterexamples.is_empty() {
        Ok(())
    } else {
        Err(ToolError::Property(format!("{} tensor counterexamples", rep.counterexamples.len())))
    }
}

fn cmd_kempf(input: &Path, out: &mut dyn Write) -> ToolResult<()> {
    let k = KempfFile::parse(&read(input)?)?;
    let f = &k.field;
    let opts = KempfOptions::default();
    writeln!(out, "S: dimension {} in F_{}^{} ⊗ F_{}^{}", k.s.dim(), f.size(), k.m, f.size(), k.n)?;
    if let Some(alpha) = &k.alpha {
        let t = alpha.tensor(f);
        writeln!(out, "given filtration: deg(S) = {}, signed f^2 = {}", fmt_q(&deg_filtered(&k.s, &t, f)?), fmt_q(&alpha.signed_instability_squared(&k.s, f)?))?;
    }
    if is_semistable_subspace(&k.s, k.m, k.n, f, &opts)? {
        writeln!(out, "semistable: yes")?;
        return Ok(());
    }
    writeln!(out, "semistable: no")?;
    let res = kempf_filtration(&k.s, k.m, k.n, f, &opts)?;
    for (name, fs) in [("M", &res.pair.m), ("N", &res.pair.n)] {
        let parts: Vec<String> = fs.basis().iter().zip(fs.weights()).map(|(v, w)| format!("({}, {})", fmt_q(w), format_vector(v, f))).collect();
        writeln!(out, "kempf {name}: [{}]", parts.join(", "))?;
    }
    let (mm, mn) = factor_slopes(&res.pair);
    writeln!(out, "f^2: {}", fmt_q(&res.value_squared))?;
    writeln!(out, "mu_alpha(M) = {}, mu_alpha(N) = {}", fmt_q(&mm), fmt_q(&mn))?;
    let ss = kempf_semisimplify(&k.s, &res.pair, f)?;
    writeln!(out, "semisimplification: dimension {}", ss.dim())?;
    for v in ss.basis() {
        writeln!(out, "  {}", format_vector(v, f))?;
    }
    Ok(())
}

fn cmd_variety(
    input: &Path,
    nu: &[i64],
    window: Option<i64>,
    extension: u32,
    csv: Option<&Path>,
    svg_out: Option<&Path>,
    out: &mut dyn Write,
) -> ToolResult<()> {
    let m = ModuleFile::parse(&read(input)?)?.module()?;
    let nu = HodgeType::new(nu.to_vec());
    if nu.len() != m.dim() {
        return Err(ToolError::Usage(format!("Hodge type has {} entries but the module has dimension {}", nu.len(), m.dim())));
    }
    let candidates = enumerate_candidate_polygons(&nu);
    let mut classes: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (_, j) in &candidates {
        let next = classes.len();
        classes.entry(j.clone()).or_insert(next);
    }
    let mut rows = Vec::new();
    let mut realized: BTreeMap<Polygon, usize> = BTreeMap::new();
    for ext in 1..=extension.max(1) {
        let opts = VarietyOptions { window, extension: ext, ..VarietyOptions::default() };
        let en = enumerate_points(&m, &nu, &opts)?;
        if let Some(reason) = &en.empty_reason {
            writeln!(out, "F_{}^{}: 0 points ({reason})", m.field().size(), ext)?;
            continue;
        }
        let completeness = match en.completeness {
            Completeness::Certified => "certified",
            Completeness::WindowLimited => "window-limited",
        };
        let subs = ambient_subspaces(&en, &EnumerationOptions::default())?;
        let polys: Vec<Polygon> = en.points.par_iter().map(|p| point_polygon(p, &subs)).collect::<kisin_core::Result<_>>()?;
        check_slope_range(&en, &polys)?;
        let e = en.module.e();
        writeln!(out, "F_{}^{}: {} points, window [{}, {}], {completeness}", m.field().size(), ext, en.points.len(), en.window.0, en.window.1)?;
        for (i, (pt, poly)) in en.points.iter().zip(&polys).enumerate() {
            if !hn_over_hodge(poly, &nu, e) {
                return Err(ToolError::Property(format!("point {i}: HN polygon below the Hodge polygon")));
            }
            let j = component_invariant(poly, &nu, e)?;
            let basis = pt.lattice.basis();
            let canon: Vec<String> = (0..basis.rows())
                .map(|r| format!("[{}]", (0..basis.cols()).map(|c| format_series(basis.get(r, c), en.module.field())).collect::<Vec<_>>().join(", ")))
                .collect();
            let canon = format!("[{}]", canon.join(", "));
            if ext == 1 {
                writeln!(out, "  point {i}: g = {canon} divisors {:?} polygon {} J = {}", pt.lattice.hodge_divisors(), fmt_polygon(poly), fmt_set(&j))?;
                *realized.entry(poly.clone()).or_default() += 1;
            }
            rows.push(vec![
                ext.to_string(),
                i.to_string(),
                canon,
                format!("{:?}", pt.lattice.hodge_divisors()),
                fmt_polygon(poly),
                fmt_set(&j),
            ]);
        }
        for (poly, idx) in strata(&polys) {
            writeln!(out, "  stratum {}: {} points", fmt_slopes(&poly), idx.len())?;
        }
        if ext == 1 {
            let cands: Vec<Polygon> = candidates.iter().map(|(p, _)| p.clone()).collect();
            let scaled: Vec<Polygon> = polys.iter().map(|p| p.scale_down(1.into(), kisin_core::rational::Q::new(1, e as i64))).collect();
            let semi = semicontinuity(&scaled, &cands);
            for (p0, pts) in &semi {
                writeln!(out, "  at or above {}: {} points", fmt_slopes(p0), pts.len())?;
            }
            for p in &scaled {
                if !cands.contains(p) {
                    return Err(ToolError::Property(format!("realized polygon {} is not a candidate", fmt_polygon(p))));
                }
            }
        }
    }
    if let Some(path) = csv {
        write_file(path, &csv_text(&["extension", "point", "basis", "divisors", "polygon", "J"], &rows)?)?;
    }
    if let Some(path) = svg_out {
        let layers: Vec<Layer> = candidates
            .iter()
            .map(|(p, j)| {
                let n = realized.get(p).copied().unwrap_or(0);
                Layer { polygon: p, class: classes[j], label: format!("J={} realized {n}", fmt_set(j)) }
            })
            .collect();
        write_file(path, &svg(&format!("Kisin variety, nu = {:?}", nu.entries()), Some(&nu.polygon()), &layers))?;
    }
    Ok(())
}

/// CSV and SVG of the candidate polygons for one Hodge type.
pub fn figure_files(nu: &HodgeType) -> ToolResult<(String, String)> {
    let cands = enumerate_candidate_polygons(nu);
    let mut classes: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (_, j) in &cands {
        let next = classes.len();
        classes.entry(j.clone()).or_insert(next);
    }
    let rows: Vec<Vec<String>> = cands
        .iter()
        .enumerate()
        .map(|(i, (p, j))| vec![i.to_string(), fmt_polygon(p), fmt_slopes(p), fmt_set(j), classes[j].to_string()])
        .collect();
    let csv = csv_text(&["index", "breakpoints", "slopes", "J", "class"], &rows)?;
    let layers: Vec<Layer> =
        cands.iter().map(|(p, j)| Layer { polygon: p, class: classes[j], label: format!("{} J={}", fmt_slopes(p), fmt_set(j)) }).collect();
    Ok((csv, svg(&format!("candidate HN polygons, nu = {:?}", nu.entries()), Some(&nu.polygon()), &layers)))
}

fn cmd_figures(nu: Option<&str>, dir: &Path, out: &mut dyn Write) -> ToolResult<()> {
    let types: Vec<Vec<i64>> = match nu {
        None => vec![vec![0, 0, 1], vec![-1, 0, 1], vec![-1, 0, 0, 1]],
        Some(text) => text
            .split(';')
            .map(|t| {
                t.split(',')
                    .map(|x| x.trim().parse::<i64>().map_err(|_| ToolError::Usage(format!("bad Hodge type `{t}`"))))
                    .collect::<ToolResult<Vec<i64>>>()
            })
            .collect::<ToolResult<_>>()?,
    };
    for t in types {
        if t.is_empty() {
            return Err(ToolError::Usage("empty Hodge type".into()));
        }
        let nu = HodgeType::new(t);
        let (csv, svg_text) = figure_files(&nu)?;
        let stem = nu.entries().iter().map(|x| x.to_string()).collect::<Vec<_>>().join("_");
        write_file(&dir.join(format!("nu_{stem}.csv")), &csv)?;
        write_file(&dir.join(format!("nu_{stem}.svg")), &svg_text)?;
        let cands = enumerate_candidate_polygons(&nu);
        let mut js: Vec<&Vec<usize>> = cands.iter().map(|(_, j)| j).collect();
        js.sort();
        js.dedup();
        writeln!(out, "nu = {:?}: {} polygons in {} classes", nu.entries(), cands.len(), js.len())?;
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> ToolResult<()> {
    match &cli.command {
        Command::Analyze { search, csv, svg } => cmd_analyze(search, csv.as_deref(), svg.as_deref(), out),
        Command::Subobjects { search, dim, csv } => cmd_subobjects(search, *dim, csv.as_deref(), out),
        Command::Hn { search, csv, svg } => cmd_hn(search, csv.as_deref(), svg.as_deref(), out),
        Command::TensorExperiment { seed, pool, fields, json } => cmd_tensor(*seed, *pool, fields, json.as_deref(), out),
        Command::Kempf { input } => cmd_kempf(input, out),
        Command::Variety { input, nu, window, extension, csv, svg } => {
            cmd_variety(input, nu, *window, *extension, csv.as_deref(), svg.as_deref(), out)
        }
        Command::Figures { nu, out_dir } => cmd_figures(nu.as_deref(), out_dir, out),
        Command::Selftest { seed, output } => {
            let rep = crate::selftest::run(*seed);
            let json = rep.to_json();
            out.write_all(json.as_bytes())?;
            if let Some(path) = output {
                write_file(path, &json)?;
            }
            if rep.all_passed {
                Ok(())
            } else {
                Err(ToolError::Property("selftest failures".into()))
            }
        }
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(ToolError::Usage("--jobs must be positive".into())),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => {
                let mut buf = Vec::new();
                let r = pool.install(|| dispatch(&cli, &mut buf));
                out.write_all(&buf).map_err(ToolError::from).and(r)
            }
            Err(e) => Err(ToolError::Usage(format!("cannot start {j} threads: {e}"))),
        },
        None => dispatch(&cli, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let ToolError::Core(CoreError::InsufficientPrecision(_)) = e {
                let _ = writeln!(err, "hint: raise `precision` in the input file or pass exact entries");
            }
            e.exit_code()
        }
    }
}
