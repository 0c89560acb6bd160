//! Command-line front end: decompose tensors, solve rank-1 wildcard
//! instances, verify decompositions, and build NAE-3SAT gadget tensors.
//!
//! Exit codes: 0 = found / verified, 1 = proven none / mismatch,
//! 2 = input error, 3 = budget exhausted. Diagnostics go to stderr;
//! results go to files or stdout.

mod formats;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tendec_core::decompose::{decompose, Budget, DecomposeOutcome};
use tendec_core::field::FieldSpec;
use tendec_core::matrix::Mat;
use tendec_core::oracle::{
    brute_force_decompose, brute_force_rank1_wildcard_matrix,
    brute_force_rank1_wildcard_tensor, enumerate_rank2_decompositions, OracleError,
};
use tendec_core::reduction::{reduce_to_rank2_wildcard, Reduction};
use tendec_core::tensor::Decomposition;
use tendec_core::wildcard::{rank1_wildcard, rank1_wildcard_matrix};

use formats::{
    parse_nae, write_decomposition, write_wild_tensor, ParsedDecomposition, ParsedMatrix,
    ParsedTensor,
};

const EXIT_FOUND: u8 = 0;
const EXIT_NONE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

const DEFAULT_ORACLE_BUDGET: u64 = 1 << 26;

#[derive(Parser)]
#[command(
    name = "tendec",
    about = "Exact rank decompositions of 3D tensors over small finite fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find a rank-R decomposition of a fully fixed tensor, or prove none
    /// exists.
    Decompose {
        /// Target rank (at most 4).
        #[arg(long)]
        rank: usize,
        /// Input tensor file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output decomposition file (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap on enumeration steps; exceeding it exits with code 3.
        #[arg(long)]
        budget: Option<u64>,
        /// Pin the first solution in enumeration order (off permits
        /// any-success execution).
        #[arg(long, default_value_t = true)]
        deterministic: bool,
    },
    /// Solve a rank-1 decomposition with wildcard cells.
    Rank1w {
        /// Input tensor file (or matrix file with --matrix).
        #[arg(long = "in")]
        input: PathBuf,
        /// Treat the input as a wildcard matrix.
        #[arg(long)]
        matrix: bool,
        /// Output file (tensor mode writes a rank-1 decomposition file).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a decomposition against a tensor cell by cell; wildcards in
    /// the tensor are skipped.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        decomp: PathBuf,
    },
    /// Convert a NAE-3SAT instance into its rank-2 wildcard gadget tensor
    /// over GF(2).
    ReduceNae {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force references for reproducing test numbers.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Exhaustive scan over factor pairs for a rank-R decomposition.
    Decompose {
        #[arg(long)]
        rank: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        budget: u64,
    },
    /// Exhaustive scan over vector tuples for rank-1 wildcard instances.
    Rank1w {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        matrix: bool,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        budget: u64,
    },
    /// Count (and optionally list) all rank-2 decompositions consistent
    /// with a GF(2) wildcard tensor.
    Rank2Enum {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        budget: u64,
        /// Print every solution instead of just the count.
        #[arg(long)]
        list: bool,
    },
}

fn fail_input(msg: impl fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn read_file(path: &Path) -> Result<String, ExitCode> {
    fs::read_to_string(path).map_err(|e| fail_input(format_args!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExitCode> {
    fs::write(path, contents).map_err(|e| fail_input(format_args!("{}: {e}", path.display())))
}

fn build_field(p: u32, k: u32) -> Result<FieldSpec, ExitCode> {
    FieldSpec::new(p, k).map_err(fail_input)
}

fn vector_line(name: &str, v: &[u32]) -> String {
    let body: Vec<String> = v.iter().map(|e| e.to_string()).collect();
    format!("{name} = {}", body.join(" "))
}

fn cmd_decompose(
    rank: usize,
    input: &Path,
    out: Option<&Path>,
    budget: Option<u64>,
    deterministic: bool,
) -> Result<ExitCode, ExitCode> {
    if rank > 4 {
        return Err(fail_input("rank must be at most 4"));
    }
    let parsed = ParsedTensor::parse(&read_file(input)?).map_err(fail_input)?;
    let field = build_field(parsed.p, parsed.k)?;
    let Some(tensor) = parsed.into_tensor(&field) else {
        return Err(fail_input("decompose requires a fully fixed tensor (no `*` cells)"));
    };
    if field.q() > 3 && rank == 4 {
        eprintln!(
            "warning: rank-4 search over GF({}) can enumerate up to q^12 candidates per \
             coefficient system; consider --budget",
            field.q()
        );
    }
    // The sequential search already returns the first solution in
    // enumeration order; non-deterministic mode permits but does not
    // require a different schedule.
    let _ = deterministic;
    let mut budget = budget.map_or_else(Budget::unlimited, Budget::limited);
    match decompose(&tensor, rank, &mut budget) {
        DecomposeOutcome::Found(dec) => {
            debug_assert_eq!(dec.eval(), tensor);
            let text = write_decomposition(&dec);
            match out {
                Some(path) => write_file(path, &text)?,
                None => print!("{text}"),
            }
            Ok(ExitCode::from(EXIT_FOUND))
        }
        DecomposeOutcome::NoSolution => {
            eprintln!("no rank-{rank} decomposition exists over GF({})", field.q());
            Ok(ExitCode::from(EXIT_NONE))
        }
        DecomposeOutcome::BudgetExhausted => {
            eprintln!("enumeration budget exhausted before a definite answer");
            Ok(ExitCode::from(EXIT_BUDGET))
        }
    }
}

fn cmd_rank1w(input: &Path, matrix: bool, out: Option<&Path>) -> Result<ExitCode, ExitCode> {
    let text = read_file(input)?;
    if matrix {
        let parsed = ParsedMatrix::parse(&text).map_err(fail_input)?;
        let field = build_field(parsed.p, parsed.k)?;
        let wild = parsed.into_wild(&field);
        let Some((a, b)) = rank1_wildcard_matrix(&wild) else {
            eprintln!("no rank-1 completion exists");
            return Ok(ExitCode::from(EXIT_NONE));
        };
        let mut lines = vector_line("a", &a);
        lines.push('\n');
        lines.push_str(&vector_line("b", &b));
        lines.push('\n');
        if let Some(path) = out {
            write_file(path, &lines)?;
        }
        print!("{lines}");
        return Ok(ExitCode::from(EXIT_FOUND));
    }
    let parsed = ParsedTensor::parse(&text).map_err(fail_input)?;
    let field = build_field(parsed.p, parsed.k)?;
    let wild = parsed.into_wild(&field);
    let Some((a, b, c)) = rank1_wildcard(&wild) else {
        eprintln!("no rank-1 completion exists");
        return Ok(ExitCode::from(EXIT_NONE));
    };
    println!("{}", vector_line("a", &a));
    println!("{}", vector_line("b", &b));
    println!("{}", vector_line("c", &c));
    if let Some(path) = out {
        let dec = Decomposition::new(
            Mat::new(&field, 1, a.len(), a),
            Mat::new(&field, 1, b.len(), b),
            Mat::new(&field, 1, c.len(), c),
        );
        write_file(path, &write_decomposition(&dec))?;
    }
    Ok(ExitCode::from(EXIT_FOUND))
}

fn cmd_verify(input: &Path, decomp: &Path) -> Result<ExitCode, ExitCode> {
    let parsed_t = ParsedTensor::parse(&read_file(input)?).map_err(fail_input)?;
    let parsed_d = ParsedDecomposition::parse(&read_file(decomp)?).map_err(fail_input)?;
    if (parsed_t.p, parsed_t.k) != (parsed_d.p, parsed_d.k) {
        return Err(fail_input("tensor and decomposition use different fields"));
    }
    if parsed_t.dims != parsed_d.dims {
        return Err(fail_input(format_args!(
            "dimension mismatch: tensor {:?} vs decomposition {:?}",
            parsed_t.dims, parsed_d.dims
        )));
    }
    let field = build_field(parsed_t.p, parsed_t.k)?;
    let wild = parsed_t.into_wild(&field);
    let eval = parsed_d.into_decomposition(&field).eval();
    let mut mismatches = 0u64;
    for (i, j, k, v) in wild.fixed_cells() {
        if eval.get(i, j, k) != v {
            if mismatches == 0 {
                eprintln!(
                    "mismatch at ({i}, {j}, {k}): tensor has {v}, decomposition gives {}",
                    eval.get(i, j, k)
                );
            }
            mismatches += 1;
        }
    }
    if mismatches == 0 {
        println!("ok");
        Ok(ExitCode::from(EXIT_FOUND))
    } else {
        eprintln!("{mismatches} cell(s) differ");
        Ok(ExitCode::from(EXIT_NONE))
    }
}

fn cmd_reduce_nae(input: &Path, out: &Path) -> Result<ExitCode, ExitCode> {
    let inst = parse_nae(&read_file(input)?).map_err(fail_input)?;
    let field = build_field(2, 1)?;
    match reduce_to_rank2_wildcard(&inst, &field) {
        Reduction::ConstantlyUnsat { clause } => {
            eprintln!(
                "clause {} is never satisfiable; the instance is constantly unsat",
                clause + 1
            );
            Ok(ExitCode::from(EXIT_NONE))
        }
        Reduction::Gadget { tensor, dropped } => {
            for idx in &dropped {
                eprintln!("note: clause {} is always satisfied and was dropped", idx + 1);
            }
            write_file(out, &write_wild_tensor(&tensor))?;
            Ok(ExitCode::from(EXIT_FOUND))
        }
    }
}

fn oracle_exit(err: OracleError) -> ExitCode {
    match err {
        OracleError::BudgetExceeded { .. } => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_BUDGET)
        }
        OracleError::NonBinaryField => fail_input(err),
    }
}

fn cmd_oracle(cmd: OracleCmd) -> Result<ExitCode, ExitCode> {
    match cmd {
        OracleCmd::Decompose { rank, input, out, budget } => {
            let parsed = ParsedTensor::parse(&read_file(&input)?).map_err(fail_input)?;
            let field = build_field(parsed.p, parsed.k)?;
            let Some(tensor) = parsed.into_tensor(&field) else {
                return Err(fail_input(
                    "the decomposition oracle requires a fully fixed tensor",
                ));
            };
            match brute_force_decompose(&tensor, rank, budget) {
                Err(e) => Ok(oracle_exit(e)),
                Ok(None) => {
                    eprintln!("no rank-{rank} decomposition exists over GF({})", field.q());
                    Ok(ExitCode::from(EXIT_NONE))
                }
                Ok(Some(dec)) => {
                    let text = write_decomposition(&dec);
                    match out {
                        Some(path) => write_file(&path, &text)?,
                        None => print!("{text}"),
                    }
                    Ok(ExitCode::from(EXIT_FOUND))
                }
            }
        }
        OracleCmd::Rank1w { input, matrix, budget } => {
            let text = read_file(&input)?;
            if matrix {
                let parsed = ParsedMatrix::parse(&text).map_err(fail_input)?;
                let field = build_field(parsed.p, parsed.k)?;
                match brute_force_rank1_wildcard_matrix(&parsed.into_wild(&field), budget) {
                    Err(e) => Ok(oracle_exit(e)),
                    Ok(None) => Ok(ExitCode::from(EXIT_NONE)),
                    Ok(Some((a, b))) => {
                        println!("{}", vector_line("a", &a));
                        println!("{}", vector_line("b", &b));
                        Ok(ExitCode::from(EXIT_FOUND))
                    }
                }
            } else {
                let parsed = ParsedTensor::parse(&text).map_err(fail_input)?;
                let field = build_field(parsed.p, parsed.k)?;
                match brute_force_rank1_wildcard_tensor(&parsed.into_wild(&field), budget) {
                    Err(e) => Ok(oracle_exit(e)),
                    Ok(None) => Ok(ExitCode::from(EXIT_NONE)),
                    Ok(Some((a, b, c))) => {
                        println!("{}", vector_line("a", &a));
                        println!("{}", vector_line("b", &b));
                        println!("{}", vector_line("c", &c));
                        Ok(ExitCode::from(EXIT_FOUND))
                    }
                }
            }
        }
        OracleCmd::Rank2Enum { input, budget, list } => {
            let parsed = ParsedTensor::parse(&read_file(&input)?).map_err(fail_input)?;
            let field = build_field(parsed.p, parsed.k)?;
            let wild = parsed.into_wild(&field);
            let iter = match enumerate_rank2_decompositions(&wild, budget) {
                Err(e) => return Ok(oracle_exit(e)),
                Ok(iter) => iter,
            };
            let mut count = 0u64;
            for sol in iter {
                count += 1;
                if list {
                    println!(
                        "{}; {}; {}; {}; {}; {}",
                        vector_line("a", &sol.a),
                        vector_line("b", &sol.b),
                        vector_line("c", &sol.c),
                        vector_line("a2", &sol.a2),
                        vector_line("b2", &sol.b2),
                        vector_line("c2", &sol.c2),
                    );
                }
            }
            println!("solutions: {count}");
            Ok(ExitCode::from(if count > 0 { EXIT_FOUND } else { EXIT_NONE }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Decompose { rank, input, out, budget, deterministic } => {
            cmd_decompose(rank, &input, out.as_deref(), budget, deterministic)
        }
        Cmd::Rank1w { input, matrix, out } => cmd_rank1w(&input, matrix, out.as_deref()),
        Cmd::Verify { input, decomp } => cmd_verify(&input, &decomp),
        Cmd::ReduceNae { input, out } => cmd_reduce_nae(&input, &out),
        Cmd::Oracle { cmd } => cmd_oracle(cmd),
    };
    result.unwrap_or_else(|code| code)
}
