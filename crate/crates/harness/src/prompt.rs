//! Prompt construction from the shipped templates.

use std::fmt::Write as _;

use slbench_core::seed::derive_seed;
use slbench_core::{Class, Result};

use crate::benchmark::{build_datapoint, Datapoint, GridCell};

pub const MAX_SHOTS: usize = 3;

const ISL: &str = include_str!("../templates/isl.txt");
const LOSL: &str = include_str!("../templates/losl.txt");
const ROSL: &str = include_str!("../templates/rosl.txt");
const IOSL: &str = include_str!("../templates/iosl.txt");

pub fn template(class: Class) -> &'static str {
    match class {
        Class::Isl => ISL,
        Class::LOsl => LOSL,
        Class::ROsl => ROSL,
        Class::Iosl => IOSL,
    }
}

/// Template text for `class` with `{{k}}` and `{{k-1}}` filled in.
pub fn instructions(class: Class, k: usize) -> String {
    template(class)
        .replace("{{k-1}}", &(k - 1).to_string())
        .replace("{{k}}", &k.to_string())
}

fn write_task(out: &mut String, p: &Datapoint) {
    let symbols: Vec<String> = p.alphabet.symbols().iter().map(char::to_string).collect();
    let _ = writeln!(out, "Function class: {}", p.class);
    let _ = writeln!(out, "k: {}", p.k);
    let _ = writeln!(out, "Alphabet: {}", symbols.join(", "));
    let _ = writeln!(out, "Input-output pairs:");
    for pair in &p.pairs {
        let _ = writeln!(out, "({}, {})", pair.input, pair.output);
    }
}

fn write_solution(out: &mut String, p: &Datapoint) {
    out.push_str("<START>\n");
    for r in p.ruleset().sorted_rules() {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out.push_str("<END>\n");
}

/// Worked examples for a few-shot prompt: fresh functions drawn from the
/// same setting as `p`, each shown with its sample and solution.
pub fn worked_examples(p: &Datapoint, shots: usize, seed: u64) -> Result<Vec<Datapoint>> {
    let cell = GridCell {
        class: p.class,
        k: p.k,
        alphabet_size: p.alphabet.len(),
        num_rules: p.num_rules,
        count: shots,
    };
    (0..shots)
        .map(|i| build_datapoint(&cell, i, derive_seed(seed, &[p.seed, 0x5107]), p.multiple))
        .collect()
}

/// The full prompt for `p`: instructions, `shots` worked examples, then the
/// task itself.
pub fn build_prompt(p: &Datapoint, shots: usize, seed: u64) -> Result<String> {
    if shots > MAX_SHOTS {
        return Err(slbench_core::Error::InvalidSetting(format!(
            "shots = {shots}; at most {MAX_SHOTS} supported"
        )));
    }
    let mut out = instructions(p.class, p.k);
    for (i, ex) in worked_examples(p, shots, seed)?.iter().enumerate() {
        let _ = write!(out, "\nExample {}:\n", i + 1);
        write_task(&mut out, ex);
        out.push_str("Rules:\n");
        write_solution(&mut out, ex);
    }
    out.push_str(if shots > 0 {
        "\nNow solve this one:\n"
    } else {
        "\n"
    });
    write_task(&mut out, p);
    Ok(out)
}
