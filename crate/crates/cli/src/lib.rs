//! The `paradox` command line: subcommands, exit codes and certificate I/O.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use paradox_core::cert::{parse_all, Certificate, Payload};
use paradox_core::crossed::{pi_witness, verify_pi_witness};
use paradox_core::embedding::{build_embedding, check_injective_lipschitz};
use paradox_core::induced::{check_induced, induce_witness, SubgroupSpec, TokenWitnessDoc};
use paradox_core::paradox::{
    doubling_matching, lift_uniform, type_order, witness_from_matching, Doubling, MatchCert, ParadoxWitness,
    TypeOrder,
};
use paradox_core::smallsets::{check_pair_intersections, greedy_small_set, verify_exclusion};
use paradox_core::verify::verify;
use paradox_core::{Elem, GroupSpec, SetExpr, Universe, Window};

pub const EXIT_FOUND: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DUAL: u8 = 2;
pub const EXIT_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "paradox", version, about = "Find and verify paradoxical decompositions on finite windows")]
pub struct Cli {
    #[command(flatten)]
    global: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Group: free:k, zn:d or bs12.
    #[arg(long, global = true)]
    group: Option<String>,
    /// Window radius.
    #[arg(long, global = true)]
    window: Option<u32>,
    /// Extra word length allowed when deciding semigroup membership.
    #[arg(long = "budget-slack", global = true, default_value_t = 4)]
    budget_slack: u32,
    /// Write the certificate or report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a doubling of A with translators S; exit 0 on a match, 2 on a deficiency.
    Check {
        #[arg(long)]
        set: String,
        /// `ball:r` or a comma-separated element list.
        #[arg(long)]
        translators: String,
    },
    /// Replay a certificate; exit 3 names the first violated fact.
    Verify { path: PathBuf },
    /// Evaluate the free-group embedding built from a witness or match certificate.
    EmbedF2 {
        #[arg(long = "from-cert")]
        from_cert: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: u32,
    },
    /// Greedy set with small pairwise translate intersections.
    SmallSet {
        #[arg(long)]
        count: usize,
        #[arg(long = "pair-radius", default_value_t = 5)]
        pair_radius: u32,
    },
    /// Projection identities for the witness in a certificate.
    CpWitness {
        #[arg(long = "from-cert")]
        from_cert: PathBuf,
    },
    /// Decide m[A] <= n[B] with translators S; exit 0 on a flow, 2 on a deficiency.
    TypeOrder {
        #[arg(short, long)]
        m: usize,
        #[arg(long)]
        set: String,
        #[arg(short, long)]
        n: usize,
        #[arg(long = "set-b")]
        set_b: String,
        #[arg(long)]
        translators: String,
    },
    /// Transport a token witness from a subgroup along t.
    Induce {
        /// cyclic:<word>, coords:<i,j,..> or kernel.
        #[arg(long)]
        subgroup: String,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        t: String,
    },
}

/// A nonzero exit: the code and the error to report.
pub struct Failure(pub u8, pub anyhow::Error);

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure(EXIT_USAGE, e)
    }
}

impl From<paradox_core::Error> for Failure {
    fn from(e: paradox_core::Error) -> Self {
        Failure(EXIT_USAGE, e.into())
    }
}

pub type Outcome = Result<u8, Failure>;

impl RunConfig {
    fn group(&self) -> anyhow::Result<GroupSpec> {
        let text = self.group.as_deref().ok_or_else(|| anyhow!("--group is required"))?;
        Ok(text.parse()?)
    }

    fn ball(&self, group: GroupSpec) -> anyhow::Result<Window> {
        let r = self.window.ok_or_else(|| anyhow!("--window is required"))?;
        Ok(group.ball(r))
    }

    fn universe(&self, group: GroupSpec) -> Universe {
        Universe::with_slack(group, self.budget_slack)
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn note(&self, text: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", text.as_ref());
        }
    }
}

/// `ball:r` or a comma-separated list of elements.
fn parse_translators(group: GroupSpec, text: &str) -> anyhow::Result<Vec<Elem>> {
    let text = text.trim();
    if let Some(r) = text.strip_prefix("ball:") {
        let r: u32 = r.trim().parse().with_context(|| format!("bad radius in '{text}'"))?;
        return Ok(group.ball(r).elements().to_vec());
    }
    let mut out = Vec::new();
    let mut pos = 0;
    loop {
        pos += text[pos..].len() - text[pos..].trim_start().len();
        let (g, used) = group.parse_elem_prefix(&text[pos..], pos)?;
        out.push(g);
        pos += used;
        pos += text[pos..].len() - text[pos..].trim_start().len();
        match text[pos..].chars().next() {
            None => break,
            Some(',') => pos += 1,
            Some(c) => bail!("unexpected '{c}' at position {pos} in translator list"),
        }
    }
    if out.is_empty() {
        bail!("empty translator list");
    }
    Ok(out)
}

fn read_cert(path: &Path) -> anyhow::Result<Certificate> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(Certificate::from_json(&text)?)
}

/// Verifies the certificate, then extracts a witness and its window.
fn load_witness(cfg: &RunConfig, path: &Path) -> Result<(GroupSpec, ParadoxWitness, Window), Failure> {
    let cert = read_cert(path)?;
    let report = verify(&cert);
    if let Some(c) = report.first_failure() {
        let detail = c.detail.clone().unwrap_or_default();
        return Err(Failure(EXIT_FAILED, anyhow!("{} does not verify: {}: {detail}", path.display(), c.name)));
    }
    let group = cert.group_spec()?;
    let w = cert.window.build(group)?;
    cfg.note(format!("loaded {} certificate on {} points", cert.kind(), w.len()));
    let parts = |set: &str, parts: &[[String; 2]], split: usize| -> paradox_core::Result<ParadoxWitness> {
        let mut out = Vec::new();
        for [a, t] in parts {
            out.push((SetExpr::parse(group, a)?, group.parse_elem(t)?));
        }
        Ok(ParadoxWitness { set: SetExpr::parse(group, set)?, parts: out, split })
    };
    let wit = match &cert.payload {
        Payload::Witness { set, parts: p, split } | Payload::CpWitness { set, parts: p, split, .. } => {
            parts(set, p, *split)?
        }
        Payload::Match { set, translators, assignment } => {
            let mut rows = Vec::new();
            for [x, s1, s2] in assignment {
                rows.push((group.parse_elem(x)?, group.parse_elem(s1)?, group.parse_elem(s2)?));
            }
            let m = MatchCert {
                set: SetExpr::parse(group, set)?,
                translators: parse_all(group, translators)?,
                window: w.clone(),
                assignment: rows,
            };
            lift_uniform(&m).unwrap_or_else(|| witness_from_matching(&m))
        }
        _ => return Err(anyhow!("a {} certificate carries no witness", cert.kind()).into()),
    };
    Ok((group, wit, w))
}

/// Runs one subcommand and returns its exit code.
pub fn run(cli: Cli) -> Outcome {
    let cfg = &cli.global;
    match &cli.command {
        Command::Check { set, translators } => {
            let group = cfg.group()?;
            let a = SetExpr::parse(group, set)?;
            let s = parse_translators(group, translators)?;
            let w = cfg.ball(group)?;
            match doubling_matching(&cfg.universe(group), &a, &s, &w)? {
                Doubling::Match(m) => {
                    cfg.note(format!("match: {} points doubled", m.assignment.len()));
                    cfg.emit(&Certificate::from_match(&m).to_json())?;
                    Ok(EXIT_FOUND)
                }
                Doubling::Deficiency(d) => {
                    cfg.note(format!("deficiency: |D| = {}, |N(D)| = {}", d.violator.len(), d.neighborhood));
                    cfg.emit(&Certificate::from_deficiency(&d).to_json())?;
                    Ok(EXIT_DUAL)
                }
            }
        }
        Command::Verify { path } => {
            let cert = read_cert(path)?;
            let report = verify(&cert);
            match report.first_failure() {
                None => {
                    cfg.note(format!("{}: {} certificate verified", path.display(), cert.kind()));
                    Ok(EXIT_FOUND)
                }
                Some(c) => {
                    let detail = c.detail.clone().unwrap_or_default();
                    Err(Failure(EXIT_FAILED, anyhow!("{}: {}", c.name, detail)))
                }
            }
        }
        Command::EmbedF2 { from_cert, depth } => {
            let (group, wit, w) = load_witness(cfg, from_cert)?;
            let e = build_embedding(&cfg.universe(group), &wit, &w)?;
            let report = check_injective_lipschitz(&e, *depth)?;
            cfg.emit(&pretty(&report.to_json()))?;
            cfg.note(format!("injective: {}, |T| = {}", report.injective, report.t.len()));
            Ok(if report.injective && report.violations.is_empty() { EXIT_FOUND } else { EXIT_FAILED })
        }
        Command::SmallSet { count, pair_radius } => {
            let group = cfg.group()?;
            let a = greedy_small_set(group, *count)?;
            let exclusion = verify_exclusion(&a);
            let (max_pair, at) = check_pair_intersections(group, &a, *pair_radius);
            let doc = json!({
                "group": group.to_string(),
                "elements": a.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "exclusion": exclusion.is_ok(),
                "pairRadius": pair_radius,
                "maxPair": max_pair,
                "maxPairAt": at.map(|g| g.to_string()),
            });
            cfg.emit(&pretty(&doc))?;
            cfg.note(format!("max |sA ∩ A| over ball({pair_radius}) = {max_pair}"));
            match exclusion {
                Ok(()) => Ok(EXIT_FOUND),
                Err(i) => Err(Failure(EXIT_FAILED, anyhow!("exclusion fails at index {i}"))),
            }
        }
        Command::CpWitness { from_cert } => {
            let (group, wit, cert_window) = load_witness(cfg, from_cert)?;
            let w = match cfg.window {
                Some(r) => group.ball(r),
                None => cert_window,
            };
            let u = cfg.universe(group);
            let pw = pi_witness(&u, &wit, &w)?;
            let report = verify_pi_witness(&u, &pw, &w);
            cfg.note(format!("p = 1_[{}]\nv = {}\nw = {}\n{report}", pw.p, pw.v, pw.w));
            cfg.emit(&Certificate::from_pi_witness(&wit, &pw, &w).to_json())?;
            Ok(if report.passed() { EXIT_FOUND } else { EXIT_FAILED })
        }
        Command::TypeOrder { m, set, n, set_b, translators } => {
            let group = cfg.group()?;
            let a = SetExpr::parse(group, set)?;
            let b = SetExpr::parse(group, set_b)?;
            let s = parse_translators(group, translators)?;
            let w = cfg.ball(group)?;
            match type_order(&cfg.universe(group), *m, &a, *n, &b, &s, &w)? {
                TypeOrder::Flow(f) => {
                    cfg.note(format!("flow: {m}[A] <= {n}[B] on {} points", f.assignment.len()));
                    cfg.emit(&Certificate::from_flow(&f).to_json())?;
                    Ok(EXIT_FOUND)
                }
                TypeOrder::Deficiency(d) => {
                    cfg.note(format!("deficiency: |D| = {}, |N(D)| = {}", d.violator.len(), d.neighborhood));
                    cfg.emit(&Certificate::from_flow_deficiency(&d).to_json())?;
                    Ok(EXIT_DUAL)
                }
            }
        }
        Command::Induce { subgroup, witness, t } => {
            let group = cfg.group()?;
            let h = SubgroupSpec::parse(group, subgroup)?;
            let text = fs::read_to_string(witness).with_context(|| format!("cannot read {}", witness.display()))?;
            let xw = text.parse::<TokenWitnessDoc>()?.witness(group)?;
            let t = group.parse_elem(t)?;
            let out = induce_witness(&h, &xw, &t)?;
            let report = check_induced(&h, &xw, &out);
            cfg.emit(&pretty(&serde_json::to_value(TokenWitnessDoc::from_witness(&xw, Some(&out))).unwrap()))?;
            cfg.note(report.to_string());
            Ok(if report.passed() { EXIT_FOUND } else { EXIT_FAILED })
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}
