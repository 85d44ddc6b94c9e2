//! Resolving the input specification (regex, automaton file or algebra
//! expression) and the document.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use spanner_core::algebra::StageReport;
use spanner_core::automata::{ClassificationReport, Label};
use spanner_core::prelude::*;
use spanner_core::regex::literal_symbols;

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct SpecArgs {
    /// Regex formula, e.g. `.*x{(a|b)*}.*`.
    #[arg(long)]
    pub rgx: Option<String>,
    /// Automaton in the JSON format (VA or eVA).
    #[arg(long)]
    pub automaton: Option<PathBuf>,
    /// Algebra expression, inline or as a path to a file holding one.
    #[arg(long)]
    pub expr: Option<String>,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    /// Compilation strategy for algebra expressions.
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    pub strategy: StrategyArg,
    /// Alphabet for regex formulas, as a string of symbols. Defaults to the
    /// symbols written in the formulas plus those of the document.
    #[arg(long)]
    pub alphabet: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Auto,
    /// Combine nondeterministically, determinize once at the end.
    Prop7,
    /// Determinize atoms first (expressions without projection).
    Prop8,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Prop7 => Strategy::DeterminizeLast,
            StrategyArg::Prop8 => Strategy::DeterminizeFirst,
        }
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct DocArgs {
    /// Document file, read as is (every character is a symbol).
    #[arg(long)]
    pub doc: Option<PathBuf>,
    /// Document given on the command line.
    #[arg(long)]
    pub doc_inline: Option<String>,
}

impl DocArgs {
    pub fn load(&self) -> Result<Document> {
        match (&self.doc, &self.doc_inline) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(Document::from_text(&text))
            }
            (None, Some(text)) => Ok(Document::from_text(text)),
            (None, None) => unreachable!("clap requires a document"),
        }
    }
}

/// A parsed input before compilation.
pub enum Input {
    Automaton(AnyAutomaton),
    Expr(AlgebraExpr),
}

/// A deterministic sequential eVA with the sizes seen on the way.
pub struct Compiled {
    pub automaton: Eva,
    pub stages: Vec<StageReport>,
    pub note: Option<String>,
}

fn stage<L: Label>(name: &str, a: &Automaton<L>) -> StageReport {
    StageReport {
        stage: name.to_string(),
        states: a.num_states(),
        transitions: a.num_transitions(),
    }
}

fn expr_text(raw: &str) -> Result<(String, PathBuf)> {
    let path = Path::new(raw);
    if path.is_file() {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok((text, base))
    } else {
        Ok((raw.to_string(), PathBuf::from(".")))
    }
}

impl SpecArgs {
    /// Parses the input. Regexes are read over `--alphabet` if given,
    /// otherwise over their literal symbols and those of `doc`.
    pub fn load(&self, opts: &CompileArgs, doc: Option<&Document>) -> Result<Input> {
        let alphabet = |patterns: &[&str]| -> Alphabet {
            if let Some(explicit) = &opts.alphabet {
                return explicit.chars().collect();
            }
            let mut sigma = Alphabet::new();
            for p in patterns {
                sigma.extend(literal_symbols(p));
            }
            if let Some(d) = doc {
                sigma.extend(d.alphabet());
            }
            sigma
        };
        if let Some(pattern) = &self.rgx {
            let sigma = alphabet(&[pattern]);
            let ast = parse_rgx(pattern, &sigma).context("parsing --rgx")?;
            return Ok(Input::Automaton(AnyAutomaton::Va(rgx_to_va(&ast, &sigma))));
        }
        if let Some(path) = &self.automaton {
            let a =
                AnyAutomaton::load(path).with_context(|| format!("loading {}", path.display()))?;
            return Ok(Input::Automaton(a));
        }
        let raw = self.expr.as_deref().expect("clap requires an input");
        let (text, base) = expr_text(raw)?;
        let syntax = parse_expr(&text).context("parsing --expr")?;
        let sigma = alphabet(&syntax.patterns());
        Ok(Input::Expr(syntax.resolve(&base, &sigma)?))
    }
}

/// Compiles an input to a deterministic sequential eVA. With `trust`, an
/// ε-free eVA input is used as is.
pub fn compile(input: Input, strategy: Strategy, trust: bool) -> Result<Compiled> {
    match input {
        Input::Expr(e) => {
            let (automaton, report) = compile_expr(&e, strategy)?;
            let note = format!(
                "strategy {}, state bound {} ({})",
                report.strategy,
                report.state_bound,
                if report.within_bound {
                    "within"
                } else {
                    "exceeded"
                }
            );
            Ok(Compiled {
                automaton,
                stages: report.stages,
                note: Some(note),
            })
        }
        Input::Automaton(AnyAutomaton::Va(v)) => {
            let mut stages = vec![stage("input", &v)];
            let automaton = if classify(&v)?.functional {
                functional_va_to_det_seva(&v)?
            } else {
                va_to_det_seva_general(&v)
            };
            stages.push(stage("determinize", &automaton));
            Ok(Compiled {
                automaton,
                stages,
                note: None,
            })
        }
        Input::Automaton(AnyAutomaton::Eva(e)) => {
            let mut stages = vec![stage("input", &e)];
            let e = if e.has_epsilon() {
                let free = eliminate_epsilon(&e);
                stages.push(stage("eliminate-epsilon", &free));
                free
            } else {
                e
            };
            if trust {
                return Ok(Compiled {
                    automaton: e,
                    stages,
                    note: Some("validation skipped".into()),
                });
            }
            let r = classify(&e)?;
            let automaton = if r.deterministic && r.sequential {
                e
            } else {
                let det = if r.sequential {
                    determinize_eva(&e)?
                } else {
                    va_to_det_seva_general(&eva_to_va(&e)?)
                };
                stages.push(stage("determinize", &det));
                det
            };
            Ok(Compiled {
                automaton,
                stages,
                note: None,
            })
        }
    }
}

/// Classification of the input as given; expressions are compiled first.
pub fn classify_input(input: Input, strategy: Strategy) -> Result<ClassificationReport> {
    Ok(match input {
        Input::Automaton(AnyAutomaton::Va(v)) => classify(&v)?,
        Input::Automaton(AnyAutomaton::Eva(e)) => classify(&e)?,
        Input::Expr(_) => classify(&compile(input, strategy, false)?.automaton)?,
    })
}
