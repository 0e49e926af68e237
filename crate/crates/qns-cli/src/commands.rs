use std::path::Path;

use qns::channel::classical_embed;
use qns::correlation::{
    build_local, build_qc, build_qc_embedded, build_quantum, classical_sqns, is_bicorrelation, is_qns, is_sqns,
    is_sqns_bicorrelation, SQNS_ROLES,
};
use qns::games::{graph_iso_check, is_perfect_channel, quantum_graph_check};
use qns::io::{to_json, ChannelFile, ClassicalFile, GameFile, LoadedGame, StochasticFile, TraceRepFile};
use qns::random;
use qns::simulate::simulate;
use qns::stochastic::verify_strongly_stochastic;
use qns::tracial::{
    is_concurrent, jointly_tracial_correlation, tracial_correlation, verify_cxyab_relations, BlockIsometry,
    RelationGenerators, TraceRep,
};
use qns::valuation::{
    evaluate_objective, export_sdpa, loc_value_classical, ns_value, Objective, SolveStatus, SolverConfig, ValueClass,
    ValueProblem,
};
use qns::{Correlation, Error, LegSystem, Result, SqnsCorrelation};
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::report::CliReport;
use crate::specs::{self, JointlyTracialSpec, LocalComponent, LocalSpec, QcSpec, QuantumSpec};
use crate::{BuildKind, Cli, GenArgs, GenKind, ValueMode, Verb, VerifyKind};

/// Largest `input dim × output dim` that `gen` will produce.
const MAX_GEN_DIM: usize = 4096;

enum Artifact {
    Json(Value),
    Text(String),
}

struct Outcome {
    report: CliReport,
    artifact: Option<Artifact>,
    converged: bool,
}

impl Outcome {
    fn report(report: CliReport) -> Self {
        Outcome { report, artifact: None, converged: true }
    }

    fn with<T: serde::Serialize>(report: CliReport, artifact: &T) -> Result<Self> {
        Ok(Outcome { report, artifact: Some(Artifact::Json(serde_json::to_value(artifact)?)), converged: true })
    }
}

/// Runs one command, prints its report and returns the exit code.
pub fn run(cli: &Cli) -> Result<u8> {
    let Outcome { mut report, artifact, converged } = match &cli.verb {
        Verb::Verify { kind, files } => verify(cli, *kind, files)?,
        Verb::Build { kind, spec } => build(cli, *kind, spec)?,
        Verb::Gen(args) => gen(cli, args)?,
        Verb::Simulate { simulator, inner } => simulate_cmd(cli, simulator, inner)?,
        Verb::Value { mode } => value(cli, mode)?,
        Verb::ExportSdpa { game } => sdpa(cli, game)?,
    };
    match (artifact, &cli.out) {
        (Some(a), Some(path)) => {
            std::fs::write(path, render_artifact(&a, cli.pretty)?)?;
            report.artifacts.push(path.display().to_string());
            print!("{}", report.render(cli.pretty));
        }
        (Some(a), None) => {
            print!("{}", render_artifact(&a, cli.pretty)?);
            eprint!("{}", report.render(cli.pretty));
        }
        (None, out) => {
            let text = report.render(cli.pretty);
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            print!("{text}");
        }
    }
    Ok(if !converged {
        3
    } else if report.pass() {
        0
    } else {
        1
    })
}

fn render_artifact(a: &Artifact, pretty: bool) -> Result<String> {
    match a {
        Artifact::Json(v) => to_json(v, pretty),
        Artifact::Text(t) => Ok(t.clone()),
    }
}

/// Reads a JSON file, recording its hash under `role`.
fn read(report: &mut CliReport, role: &str, path: &Path) -> Result<Value> {
    let bytes = std::fs::read(path)?;
    report.hash_input(role, &bytes);
    Ok(serde_json::from_slice(&bytes)?)
}

fn parse<T: DeserializeOwned>(v: Value) -> Result<T> {
    Ok(serde_json::from_value(v)?)
}

fn one<'a, P: AsRef<Path>>(files: &'a [P], what: &str) -> Result<&'a Path> {
    match files {
        [f] => Ok(f.as_ref()),
        _ => Err(Error::Format(format!("expected exactly one {what} file"))),
    }
}

fn verify(cli: &Cli, kind: VerifyKind, files: &[std::path::PathBuf]) -> Result<Outcome> {
    let tol = cli.tol;
    let name = format!("verify {}", kind_name(kind));
    let mut r = CliReport::new(name);
    match kind {
        VerifyKind::Ns => {
            let c = parse::<ChannelFile>(read(&mut r, "strategy", one(files, "channel")?)?)?.to_correlation(tol)?;
            r.absorb("ns", &is_qns(&c, tol));
        }
        VerifyKind::Sns => {
            let v = read(&mut r, "strategy", one(files, "channel or classical")?)?;
            if v.get("table").is_some() {
                let p = parse::<ClassicalFile>(v)?.to_correlation()?;
                let dev = p.sns_violation()?;
                r.verdict("sns_sums", dev <= tol, dev);
                r.absorb("sns", &is_sqns(&classical_sqns(&p)?, tol));
            } else {
                r.absorb("sns", &is_sqns(&parse::<ChannelFile>(v)?.to_sqns(tol)?, tol));
            }
        }
        VerifyKind::Stochastic => {
            let e = parse::<StochasticFile>(read(&mut r, "matrix", one(files, "stochastic")?)?)?.to_matrix()?;
            r.absorb("stochastic", &e.verify_stochastic(tol));
        }
        VerifyKind::StronglyStochastic => {
            let f = parse::<StochasticFile>(read(&mut r, "matrix", one(files, "stochastic")?)?)?;
            let [xs, as_] = f.splits.ok_or_else(|| Error::Format("file has no `splits`".into()))?;
            r.absorb("strongly_stochastic", &verify_strongly_stochastic(&f.to_matrix()?, xs, as_, tol));
        }
        VerifyKind::Bicorrelation => {
            let f = parse::<ChannelFile>(read(&mut r, "strategy", one(files, "channel")?)?)?;
            if f.in_legs.len() == 4 {
                r.absorb("bicorrelation", &is_sqns_bicorrelation(&f.to_sqns(tol)?, tol));
            } else {
                r.absorb("bicorrelation", &is_bicorrelation(&f.to_correlation(tol)?, tol));
            }
        }
        VerifyKind::Concurrent => {
            let c = parse::<ChannelFile>(read(&mut r, "strategy", one(files, "channel")?)?)?.to_correlation(tol)?;
            r.absorb("ns", &is_qns(&c, tol));
            r.absorb("concurrent", &is_concurrent(&c, tol));
        }
        VerifyKind::Perfect => {
            let [s, g] = files else {
                return Err(Error::Format("perfect takes a strategy file and a game file".into()));
            };
            let ch = parse::<ChannelFile>(read(&mut r, "strategy", s)?)?.to_channel(tol)?;
            match parse::<GameFile>(read(&mut r, "game", g)?)?.load(tol)? {
                LoadedGame::Classical(game) => {
                    let gap = 1.0 - evaluate_objective(&ch, &Objective::Classical(game))?;
                    r.verdict("perfect.value_gap", gap <= tol, gap.max(0.0));
                }
                other => r.absorb("perfect", &is_perfect_channel(&ch, &other.implication()?, tol)?),
            }
        }
        VerifyKind::Graph => {
            let (strategy, game) = match files {
                [g] => (None, g),
                [s, g] => (Some(s), g),
                _ => return Err(Error::Format("graph takes a graph game, optionally preceded by a strategy".into())),
            };
            let LoadedGame::Graph { u, v, .. } = parse::<GameFile>(read(&mut r, "game", game)?)?.load(tol)? else {
                return Err(Error::Format("expected a game of type `graph`".into()));
            };
            r.absorb("u", &quantum_graph_check(&u, tol));
            r.absorb("v", &quantum_graph_check(&v, tol));
            if let Some(s) = strategy {
                let c = parse::<ChannelFile>(read(&mut r, "strategy", s)?)?.to_correlation(tol)?;
                r.absorb("homomorphism", &graph_iso_check(&c, &u, &v, tol)?);
            }
        }
        VerifyKind::Relations => {
            let v = read(&mut r, "generators", one(files, "classical or strongly stochastic")?)?;
            let gens = if v.get("table").is_some() {
                RelationGenerators::from_classical(&parse::<ClassicalFile>(v)?.to_correlation()?)?
            } else {
                RelationGenerators::from_strongly_stochastic(&parse::<StochasticFile>(v)?.to_strong()?)?
            };
            r.absorb("relations", &verify_cxyab_relations(&gens, tol));
        }
    }
    Ok(Outcome::report(r))
}

fn kind_name<K: clap::ValueEnum>(k: K) -> String {
    k.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn build(cli: &Cli, kind: BuildKind, spec: &Path) -> Result<Outcome> {
    let tol = cli.tol;
    let mut r = CliReport::new(format!("build {}", kind_name(kind)));
    let v = read(&mut r, "spec", spec)?;
    let sqns_out = |r: &mut CliReport, c: SqnsCorrelation| -> Result<ChannelFile> {
        r.absorb("sns", &is_sqns(&c, tol));
        Ok(ChannelFile::from_sqns(&c))
    };
    let file = match kind {
        BuildKind::Local => {
            let s: LocalSpec = parse(v)?;
            let chans = s
                .components
                .iter()
                .map(|c| c.channels.iter().map(|f| f.to_channel(tol)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let comps: Vec<_> =
                s.components.iter().zip(&chans).map(|(c, ch)| (c.weight, [&ch[0], &ch[1], &ch[2], &ch[3]])).collect();
            sqns_out(&mut r, build_local(&comps)?)?
        }
        BuildKind::Quantum => {
            let s: QuantumSpec = parse(v)?;
            let (m, n) = (s.m.to_strong()?, s.n.to_strong()?);
            r.absorb("m", &m.verify(tol));
            r.absorb("n", &n.verify(tol));
            sqns_out(&mut r, build_quantum(&m, &n, &specs::vector(&s.xi)?)?)?
        }
        BuildKind::Qc => {
            let s: QcSpec = parse(v)?;
            let parts = [&s.ex, &s.ey, &s.fa, &s.fb].map(|f| f.to_matrix());
            let [ex, ey, fa, fb] = parts;
            let (ex, ey, fa, fb) = (ex?, ey?, fa?, fb?);
            for (label, e) in [("ex", &ex), ("ey", &ey), ("fa", &fa), ("fb", &fb)] {
                r.absorb(label, &e.verify_stochastic(tol));
            }
            let xi = specs::vector(&s.xi)?;
            let c = if s.embed {
                build_qc_embedded(&ex, &ey, &fa, &fb, &xi)?
            } else {
                build_qc(&ex, &ey, &fa, &fb, &xi, tol)?
            };
            sqns_out(&mut r, c)?
        }
        BuildKind::Tracial => {
            let rep = parse::<TraceRepFile>(v)?.to_rep(tol)?;
            r.absorb("rep", &rep.verify(tol));
            let c = tracial_correlation(&rep)?;
            r.absorb("ns", &is_qns(&c, tol));
            r.absorb("concurrent", &is_concurrent(&c, tol));
            ChannelFile::from_correlation(&c)
        }
        BuildKind::JointlyTracial => {
            let s: JointlyTracialSpec = parse(v)?;
            let (rx, ra) = (s.rep_x.to_rep(tol)?, s.rep_a.to_rep(tol)?);
            r.absorb("rep_x", &rx.verify(tol));
            r.absorb("rep_a", &ra.verify(tol));
            sqns_out(&mut r, jointly_tracial_correlation(&rx, &ra)?)?
        }
        BuildKind::ClassicalEmbed => {
            let p = parse::<ClassicalFile>(v)?.to_correlation()?;
            let ch = classical_embed(&p)?;
            match ch.in_legs().len() {
                2 if ch.out_legs().len() == 2 => {
                    let c = Correlation::new(ch)?;
                    r.absorb("ns", &is_qns(&c, tol));
                    ChannelFile::from_channel(c.channel())
                }
                4 if ch.out_legs().len() == 4 => {
                    let c = SqnsCorrelation::new(ch)?;
                    r.absorb("sns", &is_sqns(&c, tol));
                    ChannelFile::from_channel(c.channel())
                }
                _ => ChannelFile::from_channel(&ch),
            }
        }
    };
    Outcome::with(r, &file)
}

fn legs(names: &[String], sizes: &[usize]) -> Result<LegSystem> {
    if names.len() != sizes.len() {
        return Err(Error::Format(format!("{} names for {} legs", names.len(), sizes.len())));
    }
    let pairs: Vec<(&str, usize)> = names.iter().map(String::as_str).zip(sizes.iter().copied()).collect();
    LegSystem::of(&pairs)
}

fn default_names(ni: usize, no: usize) -> Vec<String> {
    let fixed: Option<&[&str]> = match (ni, no) {
        (1, 1) => Some(&["x", "a"]),
        (2, 2) => Some(&["x", "y", "a", "b"]),
        (4, 4) => Some(&SQNS_ROLES),
        _ => None,
    };
    match fixed {
        Some(f) => f.iter().map(|s| s.to_string()).collect(),
        None => (0..ni).map(|i| format!("in{i}")).chain((0..no).map(|o| format!("out{o}"))).collect(),
    }
}

fn names_or(args: &GenArgs, default: &[&str]) -> Vec<String> {
    if args.names.is_empty() {
        default.iter().map(|s| s.to_string()).collect()
    } else {
        args.names.clone()
    }
}

fn sizes_or(args: &GenArgs, n: usize, default: usize) -> Result<Vec<usize>> {
    match args.sizes.len() {
        0 => Ok(vec![default; n]),
        1 => Ok(vec![args.sizes[0]; n]),
        k if k == n => Ok(args.sizes.clone()),
        k => Err(Error::Format(format!("expected {n} sizes, got {k}"))),
    }
}

fn check_scale(dims: &[usize]) -> Result<()> {
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    match total {
        Some(t) if t <= MAX_GEN_DIM && t > 0 => Ok(()),
        _ => Err(Error::TooLarge(format!("generated instances are limited to total dimension {MAX_GEN_DIM}"))),
    }
}

fn random_rep(rng: &mut random::SeededRng, x: usize, a: usize, d_h: usize) -> Result<TraceRep> {
    Ok(TraceRep::uniform(BlockIsometry::random_unitary(rng, x, a, d_h)?))
}

fn gen(cli: &Cli, args: &GenArgs) -> Result<Outcome> {
    let mut rng = random::rng(cli.seed);
    let mut r = CliReport::new(format!("gen {} seed {}", kind_name(args.kind), cli.seed));
    let tol = cli.tol;
    let one_leg = |n: &str, s: usize| LegSystem::of(&[(n, s)]);
    let out = match args.kind {
        GenKind::Channel | GenKind::Classical => {
            let (si, so) = (&args.inputs, &args.outputs);
            let (si, so) = if si.is_empty() && so.is_empty() { (&vec![2, 2], &vec![2, 2]) } else { (si, so) };
            check_scale(&[si.iter().product::<usize>().pow(2), so.iter().product()])?;
            let names = if args.names.is_empty() { default_names(si.len(), so.len()) } else { args.names.clone() };
            if names.len() != si.len() + so.len() {
                return Err(Error::Format("one name per input and output leg".into()));
            }
            let (il, ol) = (legs(&names[..si.len()], si)?, legs(&names[si.len()..], so)?);
            if args.kind == GenKind::Channel {
                let rank = args.rank.unwrap_or(il.dim() * ol.dim());
                Value::from(serde_json::to_value(ChannelFile::from_channel(&random::channel(&mut rng, &il, &ol, rank)?))?)
            } else {
                serde_json::to_value(ClassicalFile::from_correlation(&random::classical(&mut rng, &il, &ol)?))?
            }
        }
        GenKind::TraceRep => {
            let s = sizes_or(args, 2, 2)?;
            check_scale(&[s[0], s[1], args.dim, args.dim])?;
            let rep = random_rep(&mut rng, s[0], s[1], args.dim)?;
            r.absorb("rep", &rep.verify(tol));
            serde_json::to_value(TraceRepFile::from_rep(&rep))?
        }
        GenKind::SnsClassical => {
            let s = sizes_or(args, 8, 2)?;
            check_scale(&s)?;
            let names = names_or(args, &SQNS_ROLES);
            let (il, ol) = (legs(&names[..4], &s[..4])?, legs(&names[4..], &s[4..])?);
            let cuts: Vec<(&str, &str)> = (0..4).map(|k| (names[k].as_str(), names[k + 4].as_str())).collect();
            let p = random::ns_classical(&mut rng, &il, &ol, &cuts)?;
            let dev = p.sns_violation()?;
            r.verdict("sns_sums", dev <= tol, dev);
            serde_json::to_value(ClassicalFile::from_correlation(&p))?
        }
        GenKind::NsClassical => {
            let s = sizes_or(args, 4, 2)?;
            check_scale(&s)?;
            let names = names_or(args, &["x", "y", "a", "b"]);
            let (il, ol) = (legs(&names[..2], &s[..2])?, legs(&names[2..], &s[2..])?);
            let cuts = [(names[0].as_str(), names[2].as_str()), (names[1].as_str(), names[3].as_str())];
            let p = random::ns_classical(&mut rng, &il, &ol, &cuts)?;
            let dev = p.ns_violation()?;
            r.verdict("ns_sums", dev <= tol, dev);
            serde_json::to_value(ClassicalFile::from_correlation(&p))?
        }
        GenKind::Stochastic => {
            let s = sizes_or(args, 2, 2)?;
            check_scale(&[s[0], s[1], args.dim, args.dim])?;
            let names = names_or(args, &["x", "a"]);
            let e = random::stoch_op(&mut rng, &legs(&names[..1], &s[..1])?, &legs(&names[1..], &s[1..])?, args.dim)?;
            r.absorb("stochastic", &e.verify_stochastic(tol));
            serde_json::to_value(StochasticFile::from_matrix(&e))?
        }
        GenKind::StronglyStochastic => {
            let s = sizes_or(args, 4, 2)?;
            check_scale(&[s.iter().product(), args.dim * args.dim * args.terms])?;
            let names = names_or(args, &["x2", "a1", "x1", "a2"]);
            let n: [&str; 4] = std::array::from_fn(|k| names.get(k).map_or("", String::as_str));
            if names.len() != 4 {
                return Err(Error::Format("strongly stochastic matrices take four leg names".into()));
            }
            let p = random::strongly_stoch_op(&mut rng, n, [s[0], s[1], s[2], s[3]], args.dim, args.terms)?;
            r.absorb("strongly_stochastic", &p.verify(tol));
            serde_json::to_value(StochasticFile::from_strong(&p))?
        }
        GenKind::ClassicalGame => {
            let s = sizes_or(args, 4, 2)?;
            check_scale(&s)?;
            let g = random::classical_game(&mut rng, [s[0], s[1], s[2], s[3]])?;
            serde_json::to_value(GameFile::from_classical(&g))?
        }
        GenKind::LocalSpec => {
            let k = args.size;
            check_scale(&[k; 8])?;
            let rank = args.rank.unwrap_or(k * k);
            let w = random::probability_vector(&mut rng, args.terms);
            let mut components = Vec::with_capacity(args.terms);
            for weight in w {
                let mut chan = |i: &str, o: &str| -> Result<ChannelFile> {
                    Ok(ChannelFile::from_channel(&random::channel(&mut rng, &one_leg(i, k)?, &one_leg(o, k)?, rank)?))
                };
                let channels = [chan("x2", "x1")?, chan("y2", "y1")?, chan("a1", "a2")?, chan("b1", "b2")?];
                components.push(LocalComponent { weight, channels });
            }
            serde_json::to_value(LocalSpec { components })?
        }
        GenKind::QuantumSpec => {
            let k = args.size;
            check_scale(&[k.pow(4), args.dim.pow(4), args.terms * args.terms])?;
            let m = random::strongly_stoch_op(&mut rng, ["x2", "a1", "x1", "a2"], [k; 4], args.dim, args.terms)?;
            let n = random::strongly_stoch_op(&mut rng, ["y2", "b1", "y1", "b2"], [k; 4], args.dim, args.terms)?;
            let xi = random::unit_vector(&mut rng, m.matrix().ancilla_dim() * n.matrix().ancilla_dim());
            serde_json::to_value(QuantumSpec {
                m: StochasticFile::from_strong(&m),
                n: StochasticFile::from_strong(&n),
                xi: specs::pairs(&xi),
            })?
        }
        GenKind::QcSpec => {
            let k = args.size;
            check_scale(&[k.pow(4), args.dim.pow(4)])?;
            let mut op = |i: &str, o: &str| random::stoch_op(&mut rng, &one_leg(i, k)?, &one_leg(o, k)?, args.dim);
            let (ex, ey, fa, fb) = (op("x2", "x1")?, op("y2", "y1")?, op("a1", "a2")?, op("b1", "b2")?);
            let total: usize = [&ex, &ey, &fa, &fb].iter().map(|e| e.ancilla_dim()).product();
            let xi = random::unit_vector(&mut rng, total);
            serde_json::to_value(QcSpec {
                ex: StochasticFile::from_matrix(&ex),
                ey: StochasticFile::from_matrix(&ey),
                fa: StochasticFile::from_matrix(&fa),
                fb: StochasticFile::from_matrix(&fb),
                xi: specs::pairs(&xi),
                embed: true,
            })?
        }
        GenKind::JointlyTracialSpec => {
            let k = args.size;
            check_scale(&[k.pow(4), args.dim.pow(2)])?;
            let rep_x = random_rep(&mut rng, k, k, args.dim)?;
            let rep_a = random_rep(&mut rng, k, k, args.dim)?;
            serde_json::to_value(JointlyTracialSpec {
                rep_x: TraceRepFile::from_rep(&rep_x),
                rep_a: TraceRepFile::from_rep(&rep_a),
            })?
        }
    };
    Ok(Outcome { report: r, artifact: Some(Artifact::Json(out)), converged: true })
}

fn simulate_cmd(cli: &Cli, simulator: &Path, inner: &Path) -> Result<Outcome> {
    let tol = cli.tol;
    let mut r = CliReport::new("simulate");
    let g = parse::<ChannelFile>(read(&mut r, "simulator", simulator)?)?.to_sqns(tol)?;
    let e = parse::<ChannelFile>(read(&mut r, "inner", inner)?)?.to_correlation(tol)?;
    let out = simulate(&g, &e)?;
    r.absorb("simulator", &is_sqns(&g, tol));
    r.absorb("ns", &is_qns(&out, tol));
    Outcome::with(r, &ChannelFile::from_correlation(&out))
}

fn objective(r: &mut CliReport, path: &Path, tol: f64) -> Result<Objective> {
    Ok(match parse::<GameFile>(read(r, "game", path)?)?.load(tol)? {
        LoadedGame::Classical(g) => Objective::Classical(g),
        LoadedGame::Implication(g) | LoadedGame::Graph { game: g, .. } => Objective::Implication(g),
    })
}

fn value(cli: &Cli, mode: &ValueMode) -> Result<Outcome> {
    let tol = cli.tol;
    match mode {
        ValueMode::Eval { game, strategy } => {
            let mut r = CliReport::new("value eval");
            let obj = objective(&mut r, game, tol)?;
            let ch = parse::<ChannelFile>(read(&mut r, "strategy", strategy)?)?.to_channel(tol)?;
            r.values.insert("value".into(), evaluate_objective(&ch, &obj)?);
            Ok(Outcome::report(r))
        }
        ValueMode::Ns { game, tol_value, max_iter } => {
            let mut r = CliReport::new("value ns");
            let obj = objective(&mut r, game, tol)?;
            let mut cfg = SolverConfig::default();
            if let Some(t) = tol_value {
                cfg.tol_value = *t;
            }
            if let Some(m) = max_iter {
                cfg.max_iter = *m;
            }
            let v = ns_value(&obj, &cfg)?;
            r.values.insert("ns".into(), v.value);
            r.values.insert("upper".into(), v.upper);
            r.absorb("witness", &is_qns(&v.witness, cfg.tol_feas.max(tol)));
            let mut out = Outcome::with(r, &ChannelFile::from_correlation(&v.witness))?;
            out.converged = v.status == SolveStatus::Converged;
            Ok(out)
        }
        ValueMode::Loc { game } => {
            let mut r = CliReport::new("value loc");
            match objective(&mut r, game, tol)? {
                Objective::Classical(g) => {
                    r.values.insert("loc".into(), loc_value_classical(&g)?);
                    Ok(Outcome::report(r))
                }
                Objective::Implication(_) => {
                    Err(Error::Unsupported("local values are computed for classical games only".into()))
                }
            }
        }
    }
}

fn sdpa(cli: &Cli, game: &Path) -> Result<Outcome> {
    let mut r = CliReport::new("export-sdpa");
    let problem = ValueProblem { objective: objective(&mut r, game, cli.tol)?, class: ValueClass::Ns };
    let mut buf = Vec::new();
    let summary = export_sdpa(&problem, &mut buf)?;
    r.values.insert("variables".into(), summary.variables as f64);
    r.values.insert("equalities".into(), summary.equalities as f64);
    let text = String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Outcome { report: r, artifact: Some(Artifact::Text(text)), converged: true })
}
