//! Command-line front end. [`run`] returns the process exit status:
//! 0 ok, 2 usage, 3 I/O, 4 crypto validation, 5 protocol.

use std::fs;
use std::io::{self, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand};
use num_bigint::RandBigInt;
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cubic::{self, KeygenParams, Mode, PrivateKey, PublicKey};
use crate::error::Error;
use crate::keyfile::{self, parse_nat};
use crate::modmath::{is_probable_prime, DEFAULT_MR_ROUNDS};
use crate::oracle;
use crate::rns::{Codeword, DEFAULT_WATERMARK_MODULUS};
use crate::unity_roots;
use crate::watermark::{self, WatermarkKey};
use crate::wire::{self, Delivery, ReceiverConfig, SenderConfig, TamperPolicy};
use crate::{Nat, Strategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CRYPTO: i32 = 4;
pub const EXIT_PROTOCOL: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "cubic-rns", version, about = "Cubic transformation with RNS-coded side-information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn nat_arg(s: &str) -> Result<Nat, String> {
    parse_nat(s).map_err(|e| e.to_string())
}

fn mode_arg(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn policy_arg(s: &str) -> Result<TamperPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a key pair (and optionally a watermark key).
    Keygen {
        #[arg(long, value_parser = mode_arg)]
        mode: Mode,
        /// Bits per prime.
        #[arg(long, default_value_t = 128)]
        bits: u64,
        #[arg(long, value_parser = nat_arg)]
        p: Option<Nat>,
        #[arg(long, value_parser = nat_arg)]
        q: Option<Nat>,
        /// Watermark modulus placed in the public key.
        #[arg(long, value_parser = nat_arg, default_value_t = Nat::from(DEFAULT_WATERMARK_MODULUS))]
        t: Nat,
        /// Omit the watermark modulus from the public key.
        #[arg(long, conflicts_with = "out_wkey")]
        no_watermark: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_pub: PathBuf,
        #[arg(long)]
        out_priv: PathBuf,
        /// Also write a random watermark key for the same `t`.
        #[arg(long)]
        out_wkey: Option<PathBuf>,
    },
    /// Print the codeword for message M.
    Encrypt {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long, value_parser = nat_arg)]
        m: Nat,
    },
    /// Print the message for codeword T.
    Decrypt {
        #[arg(long = "priv")]
        private: PathBuf,
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long = "T", value_parser = nat_arg)]
        codeword: Nat,
    },
    /// Print the three-channel codeword for message M.
    Seal {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long, value_parser = nat_arg)]
        m: Nat,
        #[arg(long)]
        wkey: PathBuf,
    },
    /// Recover M from a sealed codeword and check its watermark.
    Unseal {
        #[arg(long = "priv")]
        private: PathBuf,
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long = "T", value_parser = nat_arg)]
        codeword: Nat,
        #[arg(long)]
        wkey: PathBuf,
    },
    /// Cube roots of unity modulo N (or N*Q).
    Roots {
        #[arg(long, value_parser = nat_arg)]
        modulus: Nat,
        #[arg(long, value_parser = nat_arg)]
        q: Option<Nat>,
    },
    /// Message-to-codeword table for modulus N (or N*Q).
    Table {
        #[arg(long, value_parser = nat_arg)]
        modulus: Nat,
        #[arg(long, value_parser = nat_arg)]
        q: Option<Nat>,
    },
    /// Check a key pair against the brute-force oracles.
    Verify {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long = "priv")]
        private: PathBuf,
    },
    /// Run the receiver (Bob).
    DemoRecv {
        #[command(flatten)]
        common: DemoArgs,
        #[arg(long = "priv")]
        private: PathBuf,
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long)]
        wkey: Option<PathBuf>,
        /// Echo recovered plaintexts in ACK frames.
        #[arg(long)]
        echo: bool,
    },
    /// Run the sender (Alice).
    DemoSend {
        #[command(flatten)]
        common: DemoArgs,
        /// Expected public key; fetched from the receiver when absent.
        #[arg(long = "pub")]
        public: Option<PathBuf>,
        #[arg(long, value_parser = nat_arg, value_delimiter = ',')]
        m: Vec<Nat>,
        #[arg(long)]
        wkey: Option<PathBuf>,
    },
    /// Run a tampering relay between sender and receiver.
    DemoMitm {
        #[command(flatten)]
        common: DemoArgs,
        #[arg(long)]
        forward: String,
        #[arg(long, value_parser = policy_arg, default_value = "passthrough")]
        policy: TamperPolicy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct DemoArgs {
    /// host:port to listen on (recv, mitm) or connect to (send).
    #[arg(long)]
    addr: String,
    /// Exit after this many sessions.
    #[arg(long)]
    sessions: Option<usize>,
    /// Append transcript records to this file.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Crypto(String),
    Protocol(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Io(_) => EXIT_IO,
            Failure::Crypto(_) => EXIT_CRYPTO,
            Failure::Protocol(_) => EXIT_PROTOCOL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Crypto(m) | Failure::Protocol(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            Error::Frame(_) | Error::Protocol(_) => Failure::Protocol(e.to_string()),
            _ => Failure::Crypto(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message());
            failure.code()
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_public(path: &Path) -> Result<PublicKey, Failure> {
    Ok(keyfile::public_key_from_str(&read_file(path)?)?)
}

fn load_private(path: &Path) -> Result<PrivateKey, Failure> {
    Ok(keyfile::private_key_from_str(&read_file(path)?)?)
}

fn load_wkey(path: &Path) -> Result<WatermarkKey, Failure> {
    Ok(keyfile::watermark_key_from_str(&read_file(path)?)?)
}

fn append_transcript(path: &Option<PathBuf>, text: &str) -> CliResult {
    if let Some(path) = path {
        let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
        file.write_all(text.as_bytes())?;
    }
    Ok(())
}

fn rng_from(seed: Option<u64>) -> ChaCha8Rng {
    match seed {
        Some(s) => ChaCha8Rng::seed_from_u64(s),
        None => ChaCha8Rng::from_entropy(),
    }
}

fn execute(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Keygen {
            mode,
            bits,
            p,
            q,
            t,
            no_watermark,
            seed,
            out_pub,
            out_priv,
            out_wkey,
        } => {
            let mut params = KeygenParams::new(mode, bits);
            params.p = p;
            params.q = q;
            params.watermark_modulus = (!no_watermark).then(|| t.clone());
            let mut rng = rng_from(seed);
            let (public, private) = cubic::keygen(&params, &mut rng)?;
            write_file(&out_pub, &keyfile::public_key_to_string(&public))?;
            write_file(&out_priv, &keyfile::private_key_to_string(&private))?;
            if let Some(path) = out_wkey {
                let k1 = rng.gen_biguint_range(&Nat::one(), &t);
                let k2 = rng.gen_biguint_below(&t);
                let key = WatermarkKey::new(k1, k2, t)?;
                write_file(&path, &keyfile::watermark_key_to_string(&key))?;
            }
            writeln!(out, "{}", public.s())?;
        }
        Command::Encrypt { public, m } => {
            let public = load_public(&public)?;
            writeln!(out, "{}", cubic::encrypt(&m, &public)?)?;
        }
        Command::Decrypt {
            private,
            public,
            codeword,
        } => {
            let public = load_public(&public)?;
            let private = load_private(&private)?;
            let word = Codeword::new(codeword, public.moduli().without_watermark())?;
            writeln!(out, "{}", cubic::decrypt(&word, &private, &public)?)?;
        }
        Command::Seal { public, m, wkey } => {
            let public = load_public(&public)?;
            let key = load_wkey(&wkey)?;
            writeln!(out, "{}", watermark::seal(&m, &public, &key)?)?;
        }
        Command::Unseal {
            private,
            public,
            codeword,
            wkey,
        } => {
            let public = load_public(&public)?;
            let private = load_private(&private)?;
            let key = load_wkey(&wkey)?;
            let word = Codeword::new(codeword, public.moduli().clone())?;
            let result = watermark::unseal(&word, &private, &public, &key)?;
            let m = result
                .message
                .as_ref()
                .map_or_else(|| "-".to_string(), Nat::to_string);
            if result.authentic {
                writeln!(out, "{m} authentic")?;
            } else {
                writeln!(out, "{m} tampered")?;
                return Err(Failure::Crypto("watermark check failed".into()));
            }
        }
        Command::Roots { modulus, q } => {
            let roots = match q {
                Some(q) => unity_roots::cube_roots_of_unity_composite(&modulus, &q)?
                    .roots()
                    .to_vec(),
                None if modulus > Nat::from(2u32)
                    && is_probable_prime(&modulus, DEFAULT_MR_ROUNDS) =>
                {
                    unity_roots::cube_roots_of_unity_prime(&modulus)?.roots().to_vec()
                }
                None => oracle::brute_roots_of_unity(&modulus)?,
            };
            let text: Vec<String> = roots.iter().map(Nat::to_string).collect();
            writeln!(out, "{}", text.join(","))?;
        }
        Command::Table { modulus, q } => {
            let mode = Mode::infer(&modulus, q.as_ref())?;
            let private = PrivateKey::from_primes(mode, modulus, q)?;
            let public = private.public_key(None)?;
            for row in cubic::mapping_table(&public)? {
                writeln!(out, "{row}")?;
            }
        }
        Command::Verify { public, private } => {
            let public = load_public(&public)?;
            let private = load_private(&private)?;
            if !verify(&public, &private, out)? {
                return Err(Failure::Crypto("verification failed".into()));
            }
        }
        Command::DemoRecv {
            common,
            private,
            public,
            wkey,
            echo,
        } => {
            let public = load_public(&public)?;
            let private = load_private(&private)?;
            let wkey = wkey.as_deref().map(load_wkey).transpose()?;
            let config = Arc::new(ReceiverConfig::new(public, private, wkey, echo)?);
            let listener = TcpListener::bind(&common.addr)?;
            let transcript_path = common.transcript.clone();
            let sink = Arc::new(Mutex::new(Vec::<String>::new()));
            let sink_in = Arc::clone(&sink);
            wire::serve_tcp(&listener, config, common.sessions, move |idx, t| {
                let _ = append_transcript(&transcript_path, &t.to_lines());
                let summary = format!(
                    "session {idx}: {} ACK, {} ERROR",
                    t.count(wire::FrameKind::Ack),
                    t.count(wire::FrameKind::Error)
                );
                eprintln!("{summary}");
                sink_in.lock().expect("summary sink").push(summary);
            })?;
            for line in sink.lock().expect("summary sink").iter() {
                writeln!(out, "{line}")?;
            }
        }
        Command::DemoSend {
            common,
            public,
            m,
            wkey,
        } => {
            let config = SenderConfig {
                public: public.as_deref().map(load_public).transpose()?,
                watermark: wkey.as_deref().map(load_wkey).transpose()?,
            };
            let stream = TcpStream::connect(&common.addr)?;
            let report = wire::run_sender(&config, &m, stream)?;
            append_transcript(&common.transcript, &report.transcript.to_lines())?;
            let mut rejected = 0;
            for (msg, delivery) in m.iter().zip(&report.deliveries) {
                match delivery {
                    Delivery::Accepted { echoed: Some(back) } => writeln!(out, "{msg} ACK {back}")?,
                    Delivery::Accepted { echoed: None } => writeln!(out, "{msg} ACK")?,
                    Delivery::Rejected { reason } => {
                        rejected += 1;
                        writeln!(out, "{msg} ERROR {reason}")?
                    }
                }
            }
            if rejected > 0 {
                return Err(Failure::Protocol(format!(
                    "{rejected} of {} messages rejected",
                    m.len()
                )));
            }
        }
        Command::DemoMitm {
            common,
            forward,
            policy,
            seed,
        } => {
            let listener = TcpListener::bind(&common.addr)?;
            let transcript_path = common.transcript.clone();
            let reports =
                wire::proxy_tcp(&listener, forward, policy, seed, common.sessions, move |_, r| {
                    let _ = append_transcript(&transcript_path, &r.transcript.to_lines());
                })?;
            for (idx, report) in reports.iter().enumerate() {
                writeln!(
                    out,
                    "session {idx}: {policy}, {} ciphertexts, {} modified",
                    report.tampers.len(),
                    report.changed()
                )?;
            }
        }
    }
    Ok(())
}

fn verdict(out: &mut dyn Write, ok: bool, name: &str, detail: &str) -> io::Result<bool> {
    writeln!(out, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" })?;
    Ok(ok)
}

/// Runs the oracle checks that fit the key's size. Returns whether all passed.
fn verify(public: &PublicKey, private: &PrivateKey, out: &mut dyn Write) -> Result<bool, Failure> {
    let mut all = true;
    let strategy = Strategy::default();
    let pair_ok = private.modulus() == *public.s() && private.mode() == public.mode();
    all &= verdict(out, pair_ok, "key-pair", &format!("{} modulus {}", public.mode(), public.s()))?;
    if !pair_ok {
        return Ok(false);
    }
    let count = public.roots().len();
    all &= verdict(
        out,
        *public.moduli().r() >= Nat::from(count),
        "index-channel",
        &format!("r = {} for {count} companions", public.moduli().r()),
    )?;

    let small = public.s().to_u64().filter(|&s| s <= oracle::ROUNDTRIP_BUDGET);
    match small {
        Some(_) => {
            let scan = oracle::brute_roots_of_unity_with(public.s(), strategy)?;
            all &= verdict(
                out,
                scan == public.roots().roots(),
                "roots-of-unity",
                &format!("{} roots, brute-force scan finds {}", count, scan.len()),
            )?;
            let report = oracle::preimage_report(public.s(), strategy)?;
            let sizes = report.cardinalities();
            all &= verdict(
                out,
                sizes == [count],
                "preimage-cardinality",
                &format!("preimage sizes {sizes:?}"),
            )?;
            let sweep = oracle::cube_root_sweep(private, strategy)?;
            all &= verdict(
                out,
                sweep.passed(),
                "cube-root-exponent",
                &format!("{}/{} units", sweep.total - sweep.failures.len(), sweep.total),
            )?;
            let trip = oracle::exhaustive_roundtrip_with(public, private, strategy)?;
            all &= verdict(
                out,
                trip.passed(),
                "round-trip",
                &format!("{}/{} units", trip.total - trip.failures.len(), trip.total),
            )?;
        }
        None => {
            writeln!(out, "SKIP roots-of-unity: modulus too large to scan")?;
            writeln!(out, "SKIP preimage-cardinality: modulus too large to scan")?;
            let three = Nat::from(3u32);
            let roots_ok = public
                .roots()
                .roots()
                .iter()
                .all(|x| x.modpow(&three, public.s()).is_one());
            all &= verdict(out, roots_ok, "roots-cube-to-one", &format!("{count} roots"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let samples = 1000;
            let mut ok = 0;
            for _ in 0..samples {
                let m = rng.gen_biguint_range(&Nat::one(), public.s());
                let back = cubic::encrypt(&m, public)
                    .and_then(|w| cubic::decrypt(&w, private, public));
                // a random m shares a factor with s only with negligible probability
                if back.map(|b| b == m).unwrap_or(false) {
                    ok += 1;
                }
            }
            all &= verdict(out, ok == samples, "round-trip", &format!("{ok}/{samples} random units"))?;
        }
    }
    Ok(all)
}
