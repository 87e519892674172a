//! Command-line interface: rendering, exact distances and arcs, tree
//! decomposition with certificates, certificate verification and matching,
//! and the excursion-to-tree pipeline.
//!
//! Every run echoes the tool version and its parameters on stderr; file
//! outputs are byte-stable for identical inputs and seeds. Exit codes:
//! 0 success, 1 domain error (one-line diagnostic), 2 usage error.

mod svg;

use clap::{Parser, Subcommand};
use csst_core::decompose::{
    decompose, reference_certificate, verify_certificate, verify_decomposition, Certificate,
    StopRule,
};
use csst_core::exact::{decimal_string, parse_rational, rational_to_f64, Point, Rational};
use csst_core::excursion::{crt_tree, valence_histogram};
use csst_core::geodesic::{arc_polyline, geodesic_distance};
use csst_core::ifs::{jn_segments, kn_hulls, sample_cloud};
use csst_core::matching::{build_correspondence, check_matching, match_normalized};
use csst_core::tree::{FiniteMetricTree, TreeFile, VertexId};
use csst_core::words::PeriodicWord;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "csst",
    version,
    about = "Exact toolkit for a self-similar dendrite: rendering, geodesics, decomposition, matching",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the depth-n segment approximant as SVG.
    RenderJn {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Render the depth-n hull approximant as SVG.
    RenderKn {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Render the depth-n orbit point cloud as SVG.
    RenderCloud {
        #[arg(long)]
        n: usize,
        /// Base point "x,y" with rational coordinates; defaults to the junction.
        #[arg(long, default_value = "0,0")]
        z0: String,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Exact geodesic distance between two addresses, e.g. `dist "(1)" "(2)"`.
    Dist { word_a: String, word_b: String },
    /// Polyline along the arc between two addresses.
    Arc {
        word_a: String,
        word_b: String,
        /// Hausdorff tolerance, a positive rational like "1/1024".
        #[arg(long)]
        eps: String,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Decompose a metric tree (JSON interchange format) into labeled tiles.
    Decompose {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value_t = 3)]
        m: u8,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Optional minimum tile diameter (rational).
        #[arg(long)]
        diam_threshold: Option<String>,
        /// Keep valence-2 vertices instead of smoothing them away.
        #[arg(long)]
        no_smooth: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the analytic reference decomposition certificate.
    DecomposeCsst {
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check two certificates for matching combinatorics and emit the
    /// correspondence.
    Match {
        cert_a: PathBuf,
        cert_b: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Match two trees with three distinguished leaves each.
    MatchNormalized {
        #[arg(long)]
        tree_a: PathBuf,
        /// Three leaf vertex ids, comma separated.
        #[arg(long)]
        leaves_a: String,
        #[arg(long)]
        tree_b: PathBuf,
        #[arg(long)]
        leaves_b: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a Brownian excursion, extract the marked subtree, decompose it
    /// and match against the analytic reference.
    Crt {
        #[arg(long, default_value_t = 65536)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        marks: usize,
        #[arg(long, env = "CSST_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Export the excursion path as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out_tree: Option<PathBuf>,
        #[arg(long)]
        out_cert: Option<PathBuf>,
        #[arg(long)]
        out_corr: Option<PathBuf>,
    },
    /// Verify a decomposition certificate.
    Verify { cert: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    eprintln!("{} | {}", csst_core::TOOL_VERSION, echo(&cli.command));
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn echo(cmd: &Command) -> String {
    match cmd {
        Command::RenderJn { n, svg } => format!("render-jn --n {n} --svg {}", svg.display()),
        Command::RenderKn { n, svg } => format!("render-kn --n {n} --svg {}", svg.display()),
        Command::RenderCloud { n, z0, svg } => {
            format!("render-cloud --n {n} --z0 {z0} --svg {}", svg.display())
        }
        Command::Dist { word_a, word_b } => format!("dist {word_a} {word_b}"),
        Command::Arc {
            word_a,
            word_b,
            eps,
            svg,
        } => format!(
            "arc {word_a} {word_b} --eps {eps}{}",
            svg.as_ref()
                .map(|p| format!(" --svg {}", p.display()))
                .unwrap_or_default()
        ),
        Command::Decompose {
            tree,
            m,
            depth,
            diam_threshold,
            no_smooth,
            out,
        } => format!(
            "decompose --tree {} --m {m} --depth {depth}{}{} --out {}",
            tree.display(),
            diam_threshold
                .as_ref()
                .map(|t| format!(" --diam-threshold {t}"))
                .unwrap_or_default(),
            if *no_smooth { " --no-smooth" } else { "" },
            out.display()
        ),
        Command::DecomposeCsst { depth, out } => {
            format!("decompose-csst --depth {depth} --out {}", out.display())
        }
        Command::Match {
            cert_a,
            cert_b,
            depth,
            out,
        } => format!(
            "match {} {} --depth {depth}{}",
            cert_a.display(),
            cert_b.display(),
            out.as_ref()
                .map(|p| format!(" --out {}", p.display()))
                .unwrap_or_default()
        ),
        Command::MatchNormalized {
            tree_a,
            leaves_a,
            tree_b,
            leaves_b,
            depth,
            out,
        } => format!(
            "match-normalized --tree-a {} --leaves-a {leaves_a} --tree-b {} --leaves-b {leaves_b} --depth {depth}{}",
            tree_a.display(),
            tree_b.display(),
            out.as_ref()
                .map(|p| format!(" --out {}", p.display()))
                .unwrap_or_default()
        ),
        Command::Crt {
            n,
            marks,
            seed,
            depth,
            ..
        } => format!("crt --n {n} --marks {marks} --seed {seed} --depth {depth}"),
        Command::Verify { cert } => format!("verify {}", cert.display()),
    }
}

type RunResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn run(cmd: Command) -> RunResult {
    match cmd {
        Command::RenderJn { n, svg } => {
            let segs = jn_segments(n);
            std::fs::write(&svg, svg::segments_svg(&segs, n))?;
            println!("wrote {} segments to {}", segs.len(), svg.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::RenderKn { n, svg } => {
            let hulls = kn_hulls(n);
            std::fs::write(&svg, svg::polygons_svg(&hulls, n))?;
            println!("wrote {} polygons to {}", hulls.len(), svg.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::RenderCloud { n, z0, svg } => {
            let z0 = parse_point(&z0)?;
            let cloud = sample_cloud(n, &z0)?;
            std::fs::write(&svg, svg::cloud_svg(&cloud, n))?;
            println!("wrote {} points to {}", cloud.len(), svg.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Dist { word_a, word_b } => {
            let a = PeriodicWord::parse(&word_a, 3)?;
            let b = PeriodicWord::parse(&word_b, 3)?;
            let d = geodesic_distance(&a, &b)?;
            println!("{}", format_length(&d));
            Ok(ExitCode::SUCCESS)
        }
        Command::Arc {
            word_a,
            word_b,
            eps,
            svg,
        } => {
            let a = PeriodicWord::parse(&word_a, 3)?;
            let b = PeriodicWord::parse(&word_b, 3)?;
            let eps = parse_positive_rational(&eps)?;
            let arc = arc_polyline(&a, &b, &eps)?;
            let total = arc.polyline_length() + arc.exact_tail_bound.clone();
            println!(
                "arc with {} vertices; polyline length {}; tail {}; total {}",
                arc.vertices.len(),
                format_length(&arc.polyline_length()),
                format_length(&arc.exact_tail_bound),
                format_length(&total),
            );
            if let Some(path) = svg {
                std::fs::write(&path, svg::polyline_svg(&arc.vertices))?;
                println!("wrote arc polyline to {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Decompose {
            tree,
            m,
            depth,
            diam_threshold,
            no_smooth,
            out,
        } => {
            let bytes = std::fs::read(&tree)?;
            let hash = hex_sha256(&bytes);
            let file: TreeFile = serde_json::from_slice(&bytes)?;
            let loaded = FiniteMetricTree::from_file(&file)?;
            let working = if no_smooth { loaded } else { loaded.smoothed().0 };
            let stop = StopRule {
                max_depth: depth,
                min_diameter: diam_threshold
                    .map(|t| parse_positive_rational(&t))
                    .transpose()?,
            };
            let d = decompose(&working, m, &stop)?;
            let mut cert = d.certificate(&working, Some(hash));
            cert.diam_threshold = stop.min_diameter.map(|r| r.to_string());
            write_json(&out, &cert)?;
            let report = verify_decomposition(&d, &working);
            println!(
                "decomposed {} vertices into {} tiles to depth {}; self-check {}",
                working.vertex_count(),
                cert.tiles.len(),
                d.depth,
                pass_str(report.pass)
            );
            Ok(exit_pass(report.pass))
        }
        Command::DecomposeCsst { depth, out } => {
            let cert = reference_certificate(depth)?;
            write_json(&out, &cert)?;
            println!(
                "wrote analytic reference certificate with {} tiles to {}",
                cert.tiles.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Match {
            cert_a,
            cert_b,
            depth,
            out,
        } => {
            let a: Certificate = read_json(&cert_a)?;
            let b: Certificate = read_json(&cert_b)?;
            let report = check_matching(&a, &b, depth)?;
            println!(
                "match to depth {}: {} ({} tiles compared, {} pruned, {} label violations, {} intersection violations)",
                report.depth,
                pass_str(report.pass),
                report.compared,
                report.pruned,
                report.iff1_violations.len(),
                report.iff2_violations.len()
            );
            for v in report
                .iff1_violations
                .iter()
                .chain(&report.iff2_violations)
                .take(10)
            {
                println!("  level {} ({}, {}): {}", v.level, v.labels.0, v.labels.1, v.kind);
            }
            if report.pass {
                let corr = build_correspondence(&a, &b, depth)?;
                println!(
                    "correspondence: {} cut-point pairs, {} marked-leaf pairs",
                    corr.pairs.len(),
                    corr.marked_pairs.len()
                );
                for row in &corr.modulus {
                    println!(
                        "  level {}: max diameters {} | {}",
                        row.level, row.t_max_diameter_approx, row.s_max_diameter_approx
                    );
                }
                if let Some(path) = out {
                    write_json(&path, &corr)?;
                    println!("wrote correspondence to {}", path.display());
                }
            }
            Ok(exit_pass(report.pass))
        }
        Command::MatchNormalized {
            tree_a,
            leaves_a,
            tree_b,
            leaves_b,
            depth,
            out,
        } => {
            let (ta, map_a) = read_tree(&tree_a)?.smoothed();
            let (tb, map_b) = read_tree(&tree_b)?.smoothed();
            let la = remap_leaves(parse_leaves(&leaves_a)?, &map_a)?;
            let lb = remap_leaves(parse_leaves(&leaves_b)?, &map_b)?;
            let (corr, _da, _db) = match_normalized(&ta, la, &tb, lb, depth)?;
            println!(
                "normalized match to depth {}: pass ({} cut-point pairs)",
                corr.effective_depth,
                corr.pairs.len()
            );
            if let Some(chains) = &corr.leaf_chains {
                for c in chains {
                    println!("  leaf {} -> {} via chain {:?}", c.t_leaf, c.s_leaf, c.labels);
                }
            }
            if let Some(path) = out {
                write_json(&path, &corr)?;
                println!("wrote correspondence to {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Crt {
            n,
            marks,
            seed,
            depth,
            csv,
            out_tree,
            out_cert,
            out_corr,
        } => {
            let sample = crt_tree(n, marks, seed)?;
            println!(
                "excursion n={n}, {marks} marks, seed {seed}: spanned tree has {} vertices; valence histogram {:?}{}",
                sample.tree.vertex_count(),
                sample.histogram,
                if sample.resampled > 0 {
                    format!(" ({} mark draws discarded for exact ties)", sample.resampled)
                } else {
                    String::new()
                }
            );
            if let Some(path) = &csv {
                std::fs::write(path, sample.excursion.to_csv())?;
                println!("wrote excursion CSV to {}", path.display());
            }
            if let Some(path) = &out_tree {
                write_json(path, &sample.tree.to_file())?;
                println!("wrote spanned tree to {}", path.display());
            }
            let (smoothed, _) = sample.tree.smoothed();
            let hist = valence_histogram(&smoothed);
            println!(
                "smoothed tree: {} vertices, valence histogram {:?}",
                smoothed.vertex_count(),
                hist
            );
            let d = decompose(&smoothed, 3, &StopRule::depth(depth))?;
            let cert = d.certificate(&smoothed, None);
            if let Some(path) = &out_cert {
                write_json(path, &cert)?;
                println!("wrote certificate to {}", path.display());
            }
            let reference = reference_certificate(depth)?;
            let report = check_matching(&reference, &cert, depth)?;
            println!(
                "match against analytic reference to depth {depth}: {} ({} compared, {} pruned)",
                pass_str(report.pass),
                report.compared,
                report.pruned
            );
            if report.pass {
                let corr = build_correspondence(&reference, &cert, depth)?;
                for row in &corr.modulus {
                    println!(
                        "  level {}: max diameters {} | {}",
                        row.level, row.t_max_diameter_approx, row.s_max_diameter_approx
                    );
                }
                if let Some(path) = &out_corr {
                    write_json(path, &corr)?;
                    println!("wrote correspondence to {}", path.display());
                }
            }
            Ok(exit_pass(report.pass))
        }
        Command::Verify { cert } => {
            let cert: Certificate = read_json(&cert)?;
            let report = verify_certificate(&cert);
            for check in &report.checks {
                println!("[{}] {}", pass_str(check.pass), check.name);
                for d in check.details.iter().take(8) {
                    println!("    {d}");
                }
            }
            println!(
                "per-level max diameters: [{}] (strictly decreasing: {})",
                report.per_level_max_diameter.join(", "),
                report.strictly_decreasing
            );
            println!("verification: {}", pass_str(report.pass));
            Ok(exit_pass(report.pass))
        }
    }
}

fn pass_str(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn exit_pass(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn format_length(d: &Rational) -> String {
    format!("{} (= {})", d, decimal_string(d, 12))
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("bad point {s:?}"))?;
    let x = parse_rational(x).ok_or_else(|| format!("bad coordinate {x:?}"))?;
    let y = parse_rational(y).ok_or_else(|| format!("bad coordinate {y:?}"))?;
    Ok(Point::new(x, y))
}

fn parse_positive_rational(s: &str) -> Result<Rational, String> {
    let r = parse_rational(s).ok_or_else(|| format!("bad rational {s:?}"))?;
    if rational_to_f64(&r) > 0.0 {
        Ok(r)
    } else {
        Err(format!("{s:?} is not positive"))
    }
}

fn remap_leaves(
    leaves: [VertexId; 3],
    map: &[Option<VertexId>],
) -> Result<[VertexId; 3], String> {
    let get = |v: VertexId| {
        map.get(v as usize)
            .copied()
            .flatten()
            .ok_or_else(|| format!("vertex {v} was smoothed away or out of range"))
    };
    Ok([get(leaves[0])?, get(leaves[1])?, get(leaves[2])?])
}

fn parse_leaves(s: &str) -> Result<[VertexId; 3], String> {
    let ids: Vec<VertexId> = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad vertex id {t:?}")))
        .collect::<Result<_, _>>()?;
    if ids.len() != 3 {
        return Err(format!("need exactly three leaf ids, got {}", ids.len()));
    }
    Ok([ids[0], ids[1], ids[2]])
}

fn read_tree(path: &Path) -> Result<FiniteMetricTree, Box<dyn std::error::Error>> {
    let file: TreeFile = read_json(path)?;
    Ok(FiniteMetricTree::from_file(&file)?)
}

fn read_json<T: serde::de::DeserializeOwned>(
    path: &Path,
) -> Result<T, Box<dyn std::error::Error>> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}

fn write_json<T: serde::Serialize>(
    path: &Path,
    value: &T,
) -> Result<(), Box<dyn std::error::Error>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

fn hex_sha256(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}
