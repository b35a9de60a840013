use clap::{Parser, Subcommand};
use keyauth::ops::{self, SizeRow};
use keyauth::store::Workspace;
use keyauth::Scheme;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "keyauth", version, about = "Revocable hierarchical key authority")]
struct Cli {
    /// Workspace directory holding all artifacts
    #[arg(long, global = true, default_value = ".")]
    workspace: PathBuf,

    /// Expected scheme; checked against the workspace configuration
    #[arg(long, global = true)]
    scheme: Option<Scheme>,

    /// Machine-readable JSON output
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Initialize a workspace
    Setup {
        #[arg(long, default_value_t = 128)]
        lambda: u32,
        /// Maximum direct children per node
        #[arg(long, default_value_t = 4)]
        users: u32,
        /// Maximum identity depth
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a private key for an identity (slash-separated path)
    Genkey {
        #[arg(long)]
        id: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Issue an update key for an epoch (omit --id for the root)
    Updatekey {
        #[arg(long, default_value = "")]
        id: String,
        #[arg(long)]
        epoch: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Derive a decryption key for an identity and epoch
    Derivekey {
        #[arg(long)]
        id: String,
        #[arg(long)]
        epoch: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Encrypt a file to an identity for an epoch
    Encrypt {
        #[arg(long)]
        id: String,
        #[arg(long)]
        epoch: u64,
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decrypt a ciphertext file with a stored decryption key
    Decrypt {
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Revoke an identity from a given epoch on
    Revoke {
        #[arg(long)]
        id: String,
        #[arg(long)]
        epoch: u64,
    },
    /// Report element counts and byte sizes of all stored artifacts
    ReportSizes,
}

fn run(cli: &Cli) -> keyauth::Result<Value> {
    let ws = Workspace::new(&cli.workspace);
    match &cli.command {
        Command::Setup { lambda, users, depth, seed } => {
            let scheme = cli.scheme.ok_or_else(|| {
                keyauth::Error::Usage("setup requires --scheme hpu|hfu".into())
            })?;
            ops::setup(&ws, scheme, *lambda, *users, *depth, *seed)
        }
        Command::Genkey { id, seed } => ops::genkey(&ws, cli.scheme, id, *seed),
        Command::Updatekey { id, epoch, seed } => {
            ops::updatekey(&ws, cli.scheme, id, *epoch, *seed)
        }
        Command::Derivekey { id, epoch, seed } => {
            ops::derivekey(&ws, cli.scheme, id, *epoch, *seed)
        }
        Command::Encrypt { id, epoch, r#in, out, seed } => {
            ops::encrypt(&ws, cli.scheme, id, *epoch, r#in, out, *seed)
        }
        Command::Decrypt { r#in, out } => ops::decrypt(&ws, cli.scheme, r#in, out),
        Command::Revoke { id, epoch } => ops::revoke(&ws, cli.scheme, id, *epoch),
        Command::ReportSizes => {
            let rows = ops::report_sizes(&ws, cli.scheme)?;
            if cli.json {
                Ok(Value::Array(rows.iter().map(row_json).collect()))
            } else {
                println!("artifact,name,epoch,elements,bytes");
                for r in &rows {
                    let epoch = r.epoch.map(|e| e.to_string()).unwrap_or_default();
                    println!("{},{},{},{},{}", r.artifact, r.name, epoch, r.elements, r.bytes);
                }
                Ok(Value::Null)
            }
        }
    }
}

fn row_json(r: &SizeRow) -> Value {
    json!({
        "artifact": r.artifact,
        "name": r.name,
        "epoch": r.epoch,
        "elements": r.elements,
        "bytes": r.bytes,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Value::Null) => ExitCode::SUCCESS,
        Ok(value) => {
            if cli.json {
                println!("{value}");
            } else if let Value::Object(map) = &value {
                let fields: Vec<String> = map
                    .iter()
                    .filter(|(k, v)| *k != "command" && !v.is_null())
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                println!(
                    "{} ok: {}",
                    value["command"].as_str().unwrap_or("done"),
                    fields.join(" ")
                );
            } else {
                println!("{value}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.json {
                eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            } else {
                eprintln!("error ({}): {}", e.kind(), e);
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
