use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams derived from a single scenario seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngStream {
    Placement,
    Mobility,
    Roles,
    Agents,
    Traffic,
    Keys,
    Protocol,
    /// Per-node stream (grayhole drops, forged words).
    Node(u32),
}

impl RngStream {
    fn id(self) -> u64 {
        match self {
            RngStream::Placement => 1,
            RngStream::Mobility => 2,
            RngStream::Roles => 3,
            RngStream::Agents => 4,
            RngStream::Traffic => 5,
            RngStream::Keys => 6,
            RngStream::Protocol => 7,
            RngStream::Node(n) => 1_000 + n as u64,
        }
    }
}

pub fn stream_rng(seed: u64, stream: RngStream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}
