//! Alice/Bob transport: framing, sessions, a tampering relay and TCP plumbing.
//!
//! Sessions are generic over `Read + Write`, so tests run them over the
//! in-process [`pipe::duplex`] and the demo runs them over loopback TCP.

pub mod frame;
pub mod mitm;
pub mod pipe;
pub mod session;

use std::io;
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use frame::{Frame, FrameError, FrameKind};
pub use mitm::{run_mitm, MitmReport, TamperPolicy, TamperRecord};
pub use pipe::{duplex, PipeEnd};
pub use session::{
    run_receiver, run_sender, Delivery, Direction, ReceiverConfig, SenderConfig, SenderReport,
    SessionTranscript,
};

/// Accepts connections and serves each on its own thread.
///
/// Stops accepting after `max_sessions` connections (never, if `None`), waits
/// for the running sessions and returns their transcripts in accept order.
/// `on_session` sees each transcript as its session ends.
pub fn serve_tcp<F>(
    listener: &TcpListener,
    config: Arc<ReceiverConfig>,
    max_sessions: Option<usize>,
    on_session: F,
) -> io::Result<Vec<SessionTranscript>>
where
    F: Fn(usize, &SessionTranscript) + Send + Sync + 'static,
{
    let on_session = Arc::new(on_session);
    let mut handles = Vec::new();
    for (idx, conn) in listener.incoming().enumerate() {
        let stream = conn?;
        let config = Arc::clone(&config);
        let on_session = Arc::clone(&on_session);
        handles.push(thread::spawn(move || {
            let transcript = run_receiver(&config, stream);
            on_session(idx, &transcript);
            transcript
        }));
        if max_sessions.is_some_and(|max| idx + 1 >= max) {
            break;
        }
    }
    Ok(handles
        .into_iter()
        .map(|h| h.join().unwrap_or_default())
        .collect())
}

/// Like [`serve_tcp`] but relays every accepted connection to `forward`
/// through [`run_mitm`]. Session `k` draws its tampering randomness from
/// `ChaCha8(seed + k)`.
pub fn proxy_tcp<A, F>(
    listener: &TcpListener,
    forward: A,
    policy: TamperPolicy,
    seed: u64,
    max_sessions: Option<usize>,
    on_session: F,
) -> io::Result<Vec<MitmReport>>
where
    A: ToSocketAddrs + Clone + Send + 'static,
    F: Fn(usize, &MitmReport) + Send + Sync + 'static,
{
    let on_session = Arc::new(on_session);
    let mut handles = Vec::new();
    for (idx, conn) in listener.incoming().enumerate() {
        let client = conn?;
        let upstream = TcpStream::connect(forward.clone())?;
        let on_session = Arc::clone(&on_session);
        handles.push(thread::spawn(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
            let report = run_mitm(client, upstream, policy, &mut rng);
            on_session(idx, &report);
            report
        }));
        if max_sessions.is_some_and(|max| idx + 1 >= max) {
            break;
        }
    }
    Ok(handles
        .into_iter()
        .map(|h| h.join().unwrap_or_default())
        .collect())
}
