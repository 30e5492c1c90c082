use std::path::{Path, PathBuf};
use std::process::ExitCode;

use qvss::image::{read_pbm, write_pbm};
use qvss::parity::{build_parity_circuit, build_xor_circuit, ParitySpec};
use qvss::protocol::{
    audit_subset, deserialize_session, deserialize_share, recover_image, serialize_session,
    serialize_share, share_image, Register, SessionStore, ShareFile,
};
use qvss::report::comparison_report;
use qvss::statevector::{BasisOutcome, StateVector};
use qvss::{BinaryImage, Color, PbmVariant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::output::{read, seed_or_entropy, write_atomic, CliResult, Failure, Staged};
use crate::{AuditArgs, CircuitKind, CompareArgs, DemoArgs, EmitArgs, RecoverArgs, ShareArgs};

const SESSION_FILE: &str = "session.qvse";

fn share_file_name(j: usize) -> String {
    format!("share_{j}.qvs")
}

fn load_image(path: &Path) -> CliResult<BinaryImage> {
    read_pbm(&read(path)?).map_err(|e| Failure::from(e).in_file(path))
}

fn load_session(path: &Path) -> CliResult<SessionStore> {
    deserialize_session(&read(path)?).map_err(|e| Failure::from(e).in_file(path))
}

fn load_share(path: &Path) -> CliResult<ShareFile> {
    deserialize_share(&read(path)?).map_err(|e| Failure::from(e).in_file(path))
}

pub fn share(args: ShareArgs) -> CliResult<ExitCode> {
    if args.n < 2 {
        return Err(Failure::usage(format!("--n must be at least 2, got {}", args.n)));
    }
    let image = load_image(&args.input)?;
    let seed = seed_or_entropy(args.seed, "sharing");
    let (session, shares) = share_image(&image, args.n, args.backend.into(), seed)?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| Failure::io(&args.out_dir, e))?;
    let mut staged = Staged::default();
    let mut sizes = Vec::new();
    for share in &shares {
        let bytes = serialize_share(share);
        sizes.push((share_file_name(share.participant), bytes.len(), share.payload.len()));
        staged.add(args.out_dir.join(share_file_name(share.participant)), &bytes)?;
    }
    let session_bytes = serialize_session(&session);
    staged.add(args.out_dir.join(SESSION_FILE), &session_bytes)?;
    staged.commit()?;

    println!(
        "shared {} pixels ({}x{}) among {} participants, {} backend",
        image.pixel_count(),
        image.width(),
        image.height(),
        args.n,
        session.backend()
    );
    for (name, bytes, entries) in sizes {
        println!("  {name}: {bytes} bytes, {entries} entries");
    }
    println!("  {SESSION_FILE}: {} bytes", session_bytes.len());
    println!("expansion factor: {}", shares[0].payload.len() / image.pixel_count());
    Ok(ExitCode::SUCCESS)
}

fn share_paths(args: &RecoverArgs) -> CliResult<Vec<PathBuf>> {
    if !args.shares.is_empty() {
        return Ok(args.shares.clone());
    }
    let Some(dir) = &args.in_dir else {
        return Err(Failure::usage("give --share files or --in-dir"));
    };
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Failure::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with("share_") && name.ends_with(".qvs") {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

pub fn recover(args: RecoverArgs) -> CliResult<ExitCode> {
    let session_path = match (&args.session, &args.in_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => dir.join(SESSION_FILE),
        (None, None) => return Err(Failure::usage("give --session or --in-dir")),
    };
    let mut session = load_session(&session_path)?;
    let shares = share_paths(&args)?
        .iter()
        .map(|p| load_share(p))
        .collect::<CliResult<Vec<_>>>()?;
    let seed = seed_or_entropy(args.seed, "measurement");

    let recovered = recover_image(&shares, &mut session, seed)?;
    write_atomic(args.output.clone(), &write_pbm(&recovered, args.format.into()))?;
    println!(
        "recovered {}x{} image from {} shares -> {}",
        recovered.width(),
        recovered.height(),
        shares.len(),
        args.output.display()
    );
    if let Some(reference) = &args.reference {
        let expected = load_image(reference)?;
        let same = expected == recovered;
        println!("matches reference: {}", if same { "yes" } else { "no" });
    }
    Ok(ExitCode::SUCCESS)
}

pub fn audit(args: AuditArgs) -> CliResult<ExitCode> {
    let session = load_session(&args.session)?;
    let report = audit_subset(&session, &args.subset)?;
    println!(
        "session: n={}, backend={}, {} pixels",
        report.n, report.backend, report.pixels
    );
    let subset: Vec<String> = report.subset.iter().map(|j| j.to_string()).collect();
    println!("subset: {{{}}}", subset.join(","));
    if report.distribution.len() <= 64 {
        println!("{:<w$}  probability", "pattern", w = report.subset.len().max(7));
        for (p, prob) in report.distribution.iter().enumerate() {
            let pattern = BasisOutcome::from_index(p, report.subset.len());
            println!("{:<w$}  {prob:.12}", pattern.to_string(), w = report.subset.len().max(7));
        }
    } else {
        println!("({} patterns, table omitted)", report.distribution.len());
    }
    println!("max deviation from uniform: {:.3e}", report.max_deviation);
    if let Some(p) = report.p_value {
        println!("chi-square p-value vs uniform: {p:.6}");
    }
    println!("verdict: {}", report.verdict);
    Ok(ExitCode::SUCCESS)
}

fn print_distribution(state: &StateVector) {
    println!("{:<10}{:>16}{:>16}", "basis", "amplitude", "probability");
    for (outcome, amp) in state.support(1e-15) {
        println!("|{outcome}>{:<pad$}{:>16.12}{:>16.12}", "", amp.re, amp.norm_sqr(), pad = 8usize.saturating_sub(outcome.len()));
    }
}

pub fn emit_circuit(args: EmitArgs) -> CliResult<ExitCode> {
    let input: Option<BasisOutcome> = args.input.as_deref().map(str::parse).transpose()?;
    let n = match (args.n, &input) {
        (Some(n), Some(i)) if n != i.len() => {
            return Err(Failure::usage(format!("--n {n} does not match the {}-bit --input", i.len())))
        }
        (Some(n), _) => n,
        (None, Some(i)) => i.len(),
        (None, None) => return Err(Failure::usage("--n is required")),
    };
    if input.is_some() && args.kind == CircuitKind::Prepare {
        return Err(Failure::usage("--input only applies to --kind xor"));
    }
    let circuit = match args.kind {
        CircuitKind::Prepare => build_parity_circuit(ParitySpec::new(n, args.b)?),
        CircuitKind::Xor => build_xor_circuit(n)?,
    };
    let text = circuit.emit_assembly();
    match &args.output {
        Some(path) => {
            write_atomic(path.clone(), text.as_bytes())?;
            println!("wrote {} gates to {}", circuit.gates().len(), path.display());
        }
        None => print!("{text}"),
    }
    if !args.simulate {
        return Ok(ExitCode::SUCCESS);
    }

    println!();
    match args.kind {
        CircuitKind::Prepare => {
            let state = circuit.simulate(&StateVector::new_zero(n)?)?;
            println!("prepared |C_{}> on {n} qubits: {} basis states", args.b, state.support(1e-15).len());
            print_distribution(&state);
            if args.shots > 0 {
                let seed = seed_or_entropy(args.seed, "sampling");
                let counts = state.sample_counts(args.shots, &mut ChaCha8Rng::seed_from_u64(seed))?;
                println!("{} shots:", args.shots);
                println!("{:<10}{:>10}{:>14}", "basis", "count", "frequency");
                let mut worst = 0.0f64;
                for (index, (&count, p)) in counts.iter().zip(state.probabilities()).enumerate() {
                    if p < 1e-15 && count == 0 {
                        continue;
                    }
                    let freq = count as f64 / args.shots as f64;
                    worst = worst.max((freq - p).abs());
                    let outcome = BasisOutcome::from_index(index, n);
                    println!("{:<10}{count:>10}{freq:>14.6}", format!("|{outcome}>"));
                }
                println!("max |frequency - probability|: {worst:.6}");
            }
        }
        CircuitKind::Xor => {
            let Some(input) = input else {
                println!("(no --input given; nothing to simulate)");
                return Ok(ExitCode::SUCCESS);
            };
            let out = circuit.simulate(&StateVector::basis(&input)?)?;
            let (result, _) = out
                .support(0.5)
                .pop()
                .ok_or_else(|| Failure::usage("XOR circuit produced no basis state"))?;
            let bit = result.bit(n);
            println!("input |{input}> -> output |{result}>");
            println!("result qubit q[{}] = |{bit}> ({})", n - 1, Color::from_bit(bit));
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn compare(args: CompareArgs) -> CliResult<ExitCode> {
    let image = load_image(&args.input)?;
    let seed = seed_or_entropy(args.seed, "comparison");
    let report = comparison_report(&image, args.n, seed)?;
    print!("{report}");
    Ok(ExitCode::SUCCESS)
}

/// `1/2(|000> + |011> + ...)` for an equal-weight superposition.
fn format_superposition(state: &StateVector) -> String {
    let terms = state.support(1e-15);
    let count = terms.len();
    let root = (count as f64).sqrt().round() as usize;
    let coefficient = if root * root == count {
        format!("1/{root}")
    } else {
        format!("1/sqrt({count})")
    };
    let kets: Vec<String> = terms.iter().map(|(o, _)| format!("|{o}>")).collect();
    format!("{coefficient}({})", kets.join(" + "))
}

pub fn demo(args: DemoArgs) -> CliResult<ExitCode> {
    use Color::{Black, White};
    let n = 3;
    let secret = BinaryImage::from_pixel_list(4, 1, &[White, Black, Black, White])?;
    let (mut session, shares) = share_image(&secret, n, qvss::Backend::StateVector, args.seed)?;

    println!("(3, 3) sharing of a 4-pixel secret, seed {}", args.seed);
    println!();
    println!("{:<7}{:<7}{:<52}Shares", "Pixel", "Color", "Encoded state");
    let mut states = Vec::new();
    for l in 1..=secret.pixel_count() {
        let Register::State(state) = session.register(l) else {
            unreachable!("statevector session")
        };
        let label = format!("|C_{}>_{l}", secret.pixel(l).bit());
        let qubits: Vec<String> = (1..=n).map(|j| format!("q_{l}^{j}")).collect();
        println!(
            "{:<7}{:<7}{:<52}{}",
            l,
            secret.pixel(l).to_string(),
            format!("{label} = {}", format_superposition(state)),
            qubits.join(", ")
        );
        states.push(label);
    }

    let recovered = recover_image(&shares, &mut session, args.seed)?;
    println!();
    println!(
        "{:<22}{:<11}{:<17}{:<14}{:<7}Pixel",
        "Shares", "State", "Collapsed", "Result", "Color"
    );
    for l in 1..=secret.pixel_count() {
        let Register::State(state) = session.register(l) else {
            unreachable!("statevector session")
        };
        let (collapsed, _) = state.support(0.5).pop().expect("collapsed register");
        let shown: Vec<String> = collapsed.bits().iter().map(u8::to_string).collect();
        let qubits: Vec<String> = (1..=n).map(|j| format!("q_{l}^{j}")).collect();
        println!(
            "{:<22}{:<11}{:<17}{:<14}{:<7}{}",
            qubits.join(", "),
            states[l - 1],
            format!("|{collapsed}>"),
            format!("|{}> = |{}>", shown.join("+"), collapsed.parity()),
            recovered.pixel(l).to_string(),
            l
        );
    }
    println!();
    let ok = recovered == secret;
    println!("recovered image equals the secret: {}", if ok { "yes" } else { "no" });
    print!("{}", String::from_utf8_lossy(&write_pbm(&recovered, PbmVariant::Plain)));
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
