use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use log::info;
use spanner_core::engine::evaluate_preprocess_with;
use spanner_core::fixtures::{
    corpus_manifest, example1, gen_fig3_va, gen_fig4_automaton, gen_prop4_family, Profile,
};
use spanner_core::prelude::*;

use crate::input::{classify_input, compile, CompileArgs, Compiled, DocArgs, SpecArgs};

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn marker_labels(a: &Eva) -> usize {
    a.transitions()
        .filter_map(|(_, l, _)| match l {
            EvaLabel::Markers(s) => Some(s),
            _ => None,
        })
        .collect::<BTreeSet<_>>()
        .len()
}

fn report(c: &Compiled) {
    for s in &c.stages {
        eprintln!(
            "{}: {} states, {} transitions",
            s.stage, s.states, s.transitions
        );
    }
    if let Some(note) = &c.note {
        eprintln!("{note}");
    }
    let a = &c.automaton;
    eprintln!(
        "result: {} states, {} transitions, {} marker-set labels",
        a.num_states(),
        a.num_transitions(),
        marker_labels(a)
    );
}

fn compile_cmd(
    spec: &SpecArgs,
    opts: &CompileArgs,
    doc: Option<&Document>,
    trust: bool,
) -> Result<Compiled> {
    let started = Instant::now();
    let c = compile(spec.load(opts, doc)?, opts.strategy.into(), trust)?;
    info!(
        "compiled to {} states in {:?}",
        c.automaton.num_states(),
        started.elapsed()
    );
    Ok(c)
}

pub fn compile_to_file(
    spec: &SpecArgs,
    opts: &CompileArgs,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let c = compile_cmd(spec, opts, None, false)?;
    report(&c);
    let mut w = writer(out)?;
    writeln!(w, "{}", c.automaton.to_json())?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// `required` lists the sequential, functional and deterministic requests.
pub fn check(spec: &SpecArgs, opts: &CompileArgs, required: [bool; 3]) -> Result<ExitCode> {
    let r = classify_input(spec.load(opts, None)?, opts.strategy.into())?;
    let rows = [
        ("sequential", r.sequential, &r.sequential_witness),
        ("functional", r.functional, &r.functional_witness),
        ("deterministic", r.deterministic, &r.deterministic_witness),
    ];
    let mut ok = true;
    for ((name, holds, witness), wanted) in rows.into_iter().zip(required) {
        match witness {
            Some(w) if !holds => println!("{name}: false ({w})"),
            _ => println!("{name}: {holds}"),
        }
        ok &= holds || !wanted;
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

pub struct EnumerateOptions {
    pub limit: Option<u64>,
    pub stats: bool,
    pub skip_validation: bool,
    pub out: Option<PathBuf>,
}

pub fn enumerate(
    spec: &SpecArgs,
    opts: &CompileArgs,
    doc: &DocArgs,
    eo: EnumerateOptions,
) -> Result<ExitCode> {
    let d = doc.load()?;
    let c = compile_cmd(spec, opts, Some(&d), eo.skip_validation)?;
    let st = evaluate_preprocess_with(&c.automaton, &d, !eo.skip_validation)?;
    let mut stats = DelayReport {
        preprocessing_ops: st.preprocessing_ops(),
        ..DelayReport::default()
    };
    let mut w = writer(eo.out.as_deref())?;
    let mut stream = enumerate_stream(&st);
    while eo.limit.is_none_or(|l| stats.outputs < l) {
        let m = stream.next();
        let work = stream.take_work();
        stats.max_inter_output_work = stats.max_inter_output_work.max(work);
        stats.total_enumeration_work += work;
        let Some(m) = m else {
            stats.work_after_last = work;
            break;
        };
        if stats.outputs == 0 {
            stats.work_before_first = work;
        }
        stats.outputs += 1;
        writeln!(w, "{}", m.to_json())?;
    }
    w.flush()?;
    if eo.stats {
        eprintln!("{}", serde_json::to_string(&stats)?);
    }
    Ok(ExitCode::SUCCESS)
}

pub fn count(spec: &SpecArgs, opts: &CompileArgs, doc: &DocArgs) -> Result<ExitCode> {
    let d = doc.load()?;
    let c = compile_cmd(spec, opts, Some(&d), false)?;
    println!("{}", count_det_seva(&c.automaton, &d)?);
    Ok(ExitCode::SUCCESS)
}

pub struct BenchOptions {
    pub lengths: Vec<usize>,
    pub pattern: Option<String>,
    pub suffix: String,
    pub skip_validation: bool,
    pub out: Option<PathBuf>,
}

/// Document of length `len`: `pattern` repeated, ending with (the tail of)
/// `suffix`.
fn bench_document(pattern: &[char], suffix: &[char], len: usize) -> Document {
    let tail = suffix.len().min(len);
    let mut symbols: Vec<char> = pattern.iter().copied().cycle().take(len - tail).collect();
    symbols.extend_from_slice(&suffix[suffix.len() - tail..]);
    Document::from_symbols(symbols)
}

pub fn bench(spec: &SpecArgs, opts: &CompileArgs, bo: BenchOptions) -> Result<ExitCode> {
    let hint = Document::from_text(&format!(
        "{}{}",
        bo.pattern.as_deref().unwrap_or(""),
        bo.suffix
    ));
    let c = compile_cmd(spec, opts, Some(&hint), bo.skip_validation)?;
    let a = &c.automaton;
    let pattern: Vec<char> = match &bo.pattern {
        Some(p) => p.chars().collect(),
        None => a.alphabet().iter().copied().collect(),
    };
    anyhow::ensure!(
        !pattern.is_empty() || bo.lengths.iter().all(|&n| n <= bo.suffix.chars().count()),
        "empty document pattern"
    );
    let suffix: Vec<char> = bo.suffix.chars().collect();
    let mut w = writer(bo.out.as_deref())?;
    writeln!(
        w,
        "length,preprocessing_ops,preprocessing_us,outputs,max_inter_output_work,enumeration_us"
    )?;
    for &len in &bo.lengths {
        let d = bench_document(&pattern, &suffix, len);
        let started = Instant::now();
        let st = evaluate_preprocess_with(a, &d, !bo.skip_validation)?;
        let pre = started.elapsed();
        let started = Instant::now();
        let r = measure_delay(&st);
        let enumeration = started.elapsed();
        writeln!(
            w,
            "{len},{},{},{},{},{}",
            r.preprocessing_ops,
            pre.as_micros(),
            r.outputs,
            r.max_inter_output_work,
            enumeration.as_micros()
        )?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn fixtures(out: &Path, corpus_seeds: u64) -> Result<ExitCode> {
    fs::create_dir_all(out.join("corpus"))
        .with_context(|| format!("creating {}", out.display()))?;
    write_file(&out.join("fig3.json"), &gen_fig3_va().to_json())?;
    write_file(&out.join("fig4.json"), &gen_fig4_automaton().to_json())?;
    for l in 1..=4 {
        write_file(
            &out.join(format!("prop4-l{l}.json")),
            &gen_prop4_family(l).to_json(),
        )?;
    }
    let ex = example1();
    write_file(&out.join("example1.rgx"), &ex.pattern)?;
    write_file(&out.join("example1.txt"), &ex.document.to_string())?;
    let profiles = [
        ("det-seva", Profile::det_seva()),
        ("functional-eva", Profile::functional_eva()),
        ("functional-va", Profile::functional_va()),
        ("sequential-va", Profile::sequential_va()),
        ("any-va", Profile::any_va()),
    ];
    for (name, profile) in profiles {
        let manifest = corpus_manifest(name, &profile, 0..corpus_seeds)?;
        write_file(
            &out.join("corpus").join(format!("{name}.json")),
            &serde_json::to_string_pretty(&manifest)?,
        )?;
        info!("corpus {name}: checksum {}", manifest.checksum);
    }
    Ok(ExitCode::SUCCESS)
}
