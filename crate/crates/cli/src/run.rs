use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use forge_core::class::ClassTag;
use forge_core::derived::{
    build_tree, check_meet_law, check_tree, check_tree_embedding, meet_from_bit_vectors, projection_template,
    realize_meet, tree_joint_embed, ProjectionJoiner, TreeModel,
};
use forge_core::generic::{
    build_generic_chain, chain_amalgamate, end_extend, homogeneity_check, richness_certificate,
    verify_end_extension_necessity, Chain, ExtensionKind, ScheduleBudget,
};
use forge_core::knight::{check_k0, check_k1, check_relativized, X, Y};
use forge_core::merger::{
    check_absolute_indiscernibles, check_projection, fiber_equalizing_chain, guest_restriction, host_restriction,
    merge_structures, MergerSpec,
};
use forge_core::structure::{ef_game, structure_from_json, structure_to_json, ElementId, Embedding, Player, Structure};
use forge_core::{Limits, Verdict};
use serde::Deserialize;
use thiserror::Error;

use crate::args::{Cli, Command, MeetCommand, Output, TreeCommand};
use crate::report::{Report, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}: {detail}")]
    Format { path: String, detail: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] forge_core::Error),
}

type Result<T> = std::result::Result<T, CliError>;

fn show(p: &Path) -> String {
    p.display().to_string()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: show(path), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Write { path: show(path), source })
}

fn load_structure(path: &Path) -> Result<Structure> {
    structure_from_json(&read(path)?).map_err(|e| CliError::Format {
        path: show(path),
        detail: e.to_string(),
    })
}

fn load_chain(path: &Path) -> Result<Chain> {
    Chain::from_json(&read(path)?).map_err(|e| CliError::Format {
        path: show(path),
        detail: e.to_string(),
    })
}

fn load_embedding(path: &Path) -> Result<Embedding> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Format {
        path: show(path),
        detail: e.to_string(),
    })
}

fn load_tree(path: &Path) -> Result<TreeModel> {
    TreeModel::from_json(&read(path)?).map_err(|e| CliError::Format {
        path: show(path),
        detail: e.to_string(),
    })
}

fn class(name: &str) -> Result<ClassTag> {
    ClassTag::parse(name).ok_or_else(|| CliError::Usage(format!("unknown class `{name}`")))
}

fn emit(report: &mut Report, out: &Output, text: &str) -> Result<()> {
    if let Some(p) = &out.output {
        write(p, text)?;
        report.outputs.push(show(p));
    }
    Ok(())
}

fn counts(s: &Structure) -> BTreeMap<String, usize> {
    s.signature()
        .sorts()
        .iter()
        .map(|n| (n.clone(), s.elements_of_sort(n).len()))
        .collect()
}

fn ensure_valid(report: &mut Report, what: &str, v: &Verdict) {
    if !v.valid {
        report.verdict(v);
        report.summary = format!("{what}: {}", v.first_detail());
    }
}

/// Merger input: host and guest paths are relative to the directory of this file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MergeFile {
    host: PathBuf,
    guest: PathBuf,
    u: String,
    #[serde(default)]
    q: Option<String>,
    glue: Vec<(ElementId, ElementId)>,
}

/// Runs one parsed command line and returns its report; errors become an
/// error report with the single-line diagnostic.
pub fn execute(cli: &Cli) -> (Report, Option<String>) {
    let mut limits = Limits::default();
    if let Some(g) = cli.size_guard {
        limits = limits.with_size_guard(g);
    }
    let name = command_name(&cli.command);
    match dispatch(&cli.command, &limits) {
        Ok(r) => (r, None),
        Err(e) => {
            let mut r = Report::new(&name);
            r.status = Status::Error;
            r.summary = "command aborted".into();
            let line = e.to_string().lines().next().unwrap_or_default().to_string();
            r.error = Some(e.to_string());
            (r, Some(line))
        }
    }
}

pub fn command_name(c: &Command) -> String {
    match c {
        Command::Check { .. } => "check".into(),
        Command::Amalgamate { .. } => "amalgamate".into(),
        Command::Generic { .. } => "generic".into(),
        Command::Richness { .. } => "richness".into(),
        Command::Homogeneity { .. } => "homogeneity".into(),
        Command::Indiscernibles { .. } => "indiscernibles".into(),
        Command::Merge { .. } => "merge".into(),
        Command::Ef { .. } => "ef".into(),
        Command::EndExtend { .. } => "end-extend".into(),
        Command::ChainAmalgamate { .. } => "chain-amalgamate".into(),
        Command::Tree { command } => match command {
            TreeCommand::Build { .. } => "tree build".into(),
            TreeCommand::Check { .. } => "tree check".into(),
            TreeCommand::Jointembed { .. } => "tree jointembed".into(),
        },
        Command::Meet { command } => match command {
            MeetCommand::Build { .. } => "meet build".into(),
            MeetCommand::Check { .. } => "meet check".into(),
        },
        Command::Replay { .. } => "replay".into(),
    }
}

fn dispatch(c: &Command, limits: &Limits) -> Result<Report> {
    let mut r = Report::new(&command_name(c));
    match c {
        Command::Check { preset, file, min_fiber } => {
            r.inputs.push(show(file));
            let s = load_structure(file)?;
            let v = match preset.as_str() {
                "knight" | "k0" => check_k0(&s)?,
                "knight-u" | "k1" => check_k1(&s)?,
                "knight-q" | "k0-prime" => check_relativized(&s)?,
                "projection" => check_projection(&s, *min_fiber)?,
                "meet" => check_meet_law(&s)?,
                other => return Err(CliError::Usage(format!("unknown preset `{other}`"))),
            };
            r.detail("preset", preset);
            r.detail("elements", counts(&s));
            r.verdict(&v);
            r.summary = if v.valid {
                format!("{} elements satisfy every {preset} condition", s.len())
            } else {
                format!("{} violation(s)", v.violations.len())
            };
        }
        Command::Amalgamate { a, b, c, class: cl, eab, eac, out } => {
            let tag = class(cl)?;
            for p in [a, b, c] {
                r.inputs.push(show(p));
            }
            let (sa, sb, sc) = (load_structure(a)?, load_structure(b)?, load_structure(c)?);
            let eab = match eab {
                Some(p) => load_embedding(p)?,
                None => Embedding::identity(&sa),
            };
            let eac = match eac {
                Some(p) => load_embedding(p)?,
                None => Embedding::identity(&sa),
            };
            let am = tag.amalgamate(&sa, &sb, &sc, &eab, &eac)?;
            let d = &am.structure;
            let v = tag.check(d)?;
            ensure_valid(&mut r, "amalgam", &v);
            let img_b = am.from_b.image();
            let img_c = am.from_c.image();
            let img_a: BTreeSet<ElementId> = eab.then(&am.from_b).image();
            let meet: BTreeSet<ElementId> = img_b.intersection(&img_c).copied().collect();
            let embeds = am.from_b.is_valid(&sb, d) && am.from_c.is_valid(&sc, d);
            r.fail_unless(embeds && meet == img_a);
            r.detail("class", tag);
            r.detail("elements", counts(d));
            r.detail("fromB", &am.from_b);
            r.detail("fromC", &am.from_c);
            r.detail("padding", &am.padding);
            r.detail("disjoint", meet == img_a);
            r.detail("structure", d);
            if r.status == Status::Pass {
                r.summary = format!("amalgam with {} elements; B and C meet exactly in A", d.len());
            } else if r.summary.is_empty() {
                r.summary = "the factors do not embed disjointly over A".into();
            }
            emit(&mut r, out, &structure_to_json(d))?;
        }
        Command::Generic { class: cl, seed_structure, max_guest_size, steps, repetitions, seed, out } => {
            let tag = class(cl)?;
            let start = match seed_structure {
                Some(p) => {
                    r.inputs.push(show(p));
                    load_structure(p)?
                }
                None => Structure::new(tag.signature()),
            };
            let budget = ScheduleBudget {
                max_guest_size: *max_guest_size as usize,
                steps: *steps,
                repetitions: *repetitions as usize,
            };
            let chain = build_generic_chain(tag, start, budget, *seed, limits)?;
            let v = chain.verify()?;
            r.seed = Some(*seed);
            r.verdict(&v);
            r.detail("class", tag);
            r.detail("budget", budget);
            r.detail("stages", chain.len());
            r.detail("finalStage", counts(chain.last()));
            r.summary = format!("{} stages, final stage {} elements", chain.len(), chain.last().len());
            emit(&mut r, out, &chain.to_json())?;
        }
        Command::Richness { chain, pair_bound } => {
            r.inputs.push(show(chain));
            let ch = load_chain(chain)?;
            let rep = richness_certificate(&ch, *pair_bound, limits)?;
            r.fail_unless(rep.all_served());
            r.summary = format!(
                "{} pairs, {} items, {} unserved",
                rep.pairs.len(),
                rep.items.len(),
                rep.unserved
            );
            r.detail("pairBound", pair_bound);
            r.detail("minServices", rep.min_services());
            r.detail("items", &rep.items);
            r.detail("unserved", rep.unserved);
        }
        Command::Homogeneity { chain, part_bound, strict } => {
            r.inputs.push(show(chain));
            let ch = load_chain(chain)?;
            let rep = homogeneity_check(&ch, *part_bound, *strict, limits)?;
            r.fail_unless(rep.failures == 0);
            r.summary = format!("{} partial isomorphisms, {} not extended", rep.items.len(), rep.failures);
            r.detail("partBound", part_bound);
            r.detail("strict", strict);
            r.detail("byGap", &rep.by_gap);
            r.detail("failures", rep.failures);
        }
        Command::Indiscernibles { file, pred, class: cl, equalize, strict, seed } => {
            r.inputs.push(show(file));
            let text = read(file)?;
            let ch = match Chain::from_json(&text) {
                Ok(ch) => ch,
                Err(_) => {
                    let s = load_structure(file)?;
                    if *equalize {
                        fiber_equalizing_chain(&s)?
                    } else {
                        Chain::new(class(cl)?, s)?
                    }
                }
            };
            let rep = check_absolute_indiscernibles(&ch, pred, *strict, *seed, limits)?;
            r.fail_unless(rep.all_extended());
            if rep.sampled {
                r.seed = rep.sample_seed;
            }
            let total: usize = rep.stages.iter().map(|s| s.checked).sum();
            let failed: usize = rep.stages.iter().map(|s| s.failed).sum();
            r.summary = format!(
                "{total} permutations over {} stages, {failed} not extended{}",
                rep.stages.len(),
                if rep.sampled { " (sampled)" } else { "" }
            );
            r.detail("predicate", pred);
            r.detail("strict", strict);
            r.detail("sampled", rep.sampled);
            r.detail("stages", &rep.stages);
            r.detail("outcomes", &rep.outcomes);
        }
        Command::Merge { spec, out } => {
            r.inputs.push(show(spec));
            let mf: MergeFile = serde_json::from_str(&read(spec)?).map_err(|e| CliError::Format {
                path: show(spec),
                detail: e.to_string(),
            })?;
            let base = spec.parent().unwrap_or(Path::new("."));
            let host = load_structure(&base.join(&mf.host))?;
            let guest = load_structure(&base.join(&mf.guest))?;
            let ms = MergerSpec {
                u: mf.u,
                q: mf.q,
                glue: mf.glue,
            };
            let m = merge_structures(&host, &guest, &ms)?;
            let host_ok = host_restriction(&m.structure, host.signature())? == host;
            let guest_ok = guest_restriction(&m, guest.signature())? == guest;
            r.fail_unless(host_ok && guest_ok);
            r.summary = format!(
                "merger with {} elements; host restriction {}, guest restriction {}",
                m.structure.len(),
                if host_ok { "equal" } else { "differs" },
                if guest_ok { "equal" } else { "differs" }
            );
            r.detail("hostRestriction", host_ok);
            r.detail("guestRestriction", guest_ok);
            r.detail("guestIds", &m.guest_ids);
            r.detail("elements", counts(&m.structure));
            emit(&mut r, out, &structure_to_json(&m.structure))?;
        }
        Command::Ef { a, b, rounds } => {
            r.inputs.push(show(a));
            r.inputs.push(show(b));
            let (sa, sb) = (load_structure(a)?, load_structure(b)?);
            let o = ef_game(&sa, &sb, *rounds, limits).map_err(forge_core::Error::from)?;
            r.fail_unless(o.winner == Player::Duplicator);
            r.summary = match o.winner {
                Player::Duplicator => format!("Duplicator wins the {rounds}-round game"),
                Player::Spoiler => format!("Spoiler wins the {rounds}-round game"),
            };
            r.detail("rounds", rounds);
            r.detail("winner", o.winner);
            r.detail("strategy", &o.strategy);
            r.detail("spoilerLine", &o.spoiler_line);
        }
        Command::EndExtend { chain, k, out } => {
            r.inputs.push(show(chain));
            let ch = load_chain(chain)?;
            let ext = end_extend(&ch, *k)?;
            let before = ch.last();
            let after = ext.last();
            let nec = verify_end_extension_necessity(before, after, &Embedding::identity(before))?;
            let v = ext.verify()?;
            r.verdict(&v);
            let x_fixed = before.elements_of_sort(X) == after.elements_of_sort(X);
            r.fail_unless(nec.kind == ExtensionKind::EndExtension && x_fixed);
            r.summary = format!(
                "{k} step(s): Y {} -> {}, X {} fixed",
                before.elements_of_sort(Y).len(),
                after.elements_of_sort(Y).len(),
                if x_fixed { "kept" } else { "not" }
            );
            r.detail("necessity", &nec);
            r.detail("stages", ext.len());
            emit(&mut r, out, &ext.to_json())?;
        }
        Command::ChainAmalgamate { chain, a, b, embedding, out } => {
            for p in [chain, a, b] {
                r.inputs.push(show(p));
            }
            let ch = load_chain(chain)?;
            let (sa, sb) = (load_structure(a)?, load_structure(b)?);
            let e = embedding.as_deref().map(load_embedding).transpose()?;
            let (next, info) = chain_amalgamate(&ch, &sa, &sb, e.as_ref(), limits)?;
            let d = next.last();
            let v = check_k0(d)?;
            ensure_valid(&mut r, "new stage", &v);
            let keeps_old = Embedding::identity(ch.last()).is_valid(ch.last(), d);
            let has_b = info.from_b.is_valid(&sb, d);
            r.fail_unless(keeps_old && has_b);
            if r.summary.is_empty() {
                r.summary = format!(
                    "new stage with {} elements, surrogate {}, {} repair element(s)",
                    d.len(),
                    info.surrogate.map_or("none".to_string(), |s| s.to_string()),
                    info.x_new.len()
                );
            }
            r.detail("info", &info);
            r.detail("stageEmbedded", keeps_old);
            r.detail("guestEmbedded", has_b);
            emit(&mut r, out, &next.to_json())?;
        }
        Command::Tree { command } => match command {
            TreeCommand::Build { alphabet, depth, guest, predicate, eventually_constant, out } => {
                let template = match guest {
                    Some(p) => {
                        r.inputs.push(show(p));
                        load_structure(p)?
                    }
                    None => projection_template(*alphabet),
                };
                let t = build_tree(*alphabet, *depth, &template, predicate, *eventually_constant, limits)?;
                let v = check_tree(&t);
                r.verdict(&v);
                r.summary = format!("{} nodes, {} branches", t.nodes.len(), t.branches.len());
                r.detail("nodes", t.nodes.len());
                r.detail("branches", t.branches.len());
                emit(&mut r, out, &t.to_json())?;
            }
            TreeCommand::Check { tree } => {
                r.inputs.push(show(tree));
                let t = load_tree(tree)?;
                let v = check_tree(&t);
                r.verdict(&v);
                r.summary = if v.valid {
                    format!("{} nodes, {} branches, every invariant holds", t.nodes.len(), t.branches.len())
                } else {
                    format!("{} violation(s)", v.violations.len())
                };
            }
            TreeCommand::Jointembed { t0, t1, extra, out } => {
                r.inputs.push(show(t0));
                r.inputs.push(show(t1));
                let (a, b) = (load_tree(t0)?, load_tree(t1)?);
                let j = tree_joint_embed(&a, &b, &ProjectionJoiner { extra: *extra }, limits)?;
                let mut v = check_tree(&j.tree);
                v.merge(check_tree_embedding(&a, &j.tree, &j.left));
                v.merge(check_tree_embedding(&b, &j.tree, &j.right));
                r.verdict(&v);
                r.summary = format!(
                    "common tree with {} nodes, {} branches",
                    j.tree.nodes.len(),
                    j.tree.branches.len()
                );
                r.detail("alphabet", &j.tree.alphabet);
                let mut text = serde_json::to_string_pretty(&j).expect("joint embeddings serialize");
                text.push('\n');
                emit(&mut r, out, &text)?;
            }
        },
        Command::Meet { command } => match command {
            MeetCommand::Build { x_size, vectors, out } => {
                let mut vs = Vec::new();
                for w in vectors {
                    if let Some(c) = w.chars().find(|c| *c != '0' && *c != '1') {
                        return Err(CliError::Usage(format!("`{w}` contains `{c}`; vectors are 0/1 strings")));
                    }
                    vs.push(w.chars().map(|c| c == '1').collect::<Vec<bool>>());
                }
                let m = meet_from_bit_vectors(*x_size, &vs)?;
                let v = check_meet_law(&m)?;
                r.verdict(&v);
                r.summary = format!("{} vectors over {x_size} coordinates", vs.len());
                r.detail("structure", &m);
                emit(&mut r, out, &structure_to_json(&m))?;
            }
            MeetCommand::Check { file, realize } => {
                r.inputs.push(show(file));
                let m = load_structure(file)?;
                let v = check_meet_law(&m)?;
                r.verdict(&v);
                r.summary = if v.valid { "the meet law holds".into() } else { v.first_detail() };
                if *realize {
                    let real = realize_meet(&m, 1)?;
                    r.fail_unless(real.is_some());
                    r.detail("realization", real);
                }
            }
        },
        Command::Replay { chain } => {
            r.inputs.push(show(chain));
            let ch = load_chain(chain)?;
            let again = ch.replay()?;
            let same = again.to_json() == ch.to_json();
            let v = ch.verify()?;
            r.verdict(&v);
            r.fail_unless(same);
            r.summary = format!(
                "{} ledger entries replayed; chain {}",
                ch.ledger.len(),
                if same { "reproduced exactly" } else { "differs" }
            );
            r.detail("reproduced", same);
        }
    }
    Ok(r)
}

/// The report in the chosen format.
pub fn render(cli: &Cli, report: &Report) -> String {
    match cli.format {
        crate::args::Format::Text => report.to_text(),
        crate::args::Format::Json => report.to_json(),
    }
}
