use std::fmt;

use hmac::{Hmac, Mac};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use sha3::{Digest, Sha3_256};

use super::CryptoError;

type HmacSha3 = Hmac<Sha3_256>;

/// Fixed-width opaque code word (codes 1–3, hash outputs).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CodeWord(Vec<u8>);

impl CodeWord {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn zero(width: usize) -> Self {
        Self(vec![0; width])
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R, width: usize) -> Self {
        let mut bytes = vec![0; width];
        rng.fill_bytes(&mut bytes);
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Debug for CodeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CodeWord(")?;
        for b in self.0.iter().take(6) {
            write!(f, "{b:02x}")?;
        }
        if self.0.len() > 6 {
            write!(f, "..")?;
        }
        write!(f, ")")
    }
}

/// HMAC-SHA3-256 in counter mode, truncated to `width` bytes.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyedHash {
    key: [u8; 32],
    width: usize,
}

impl fmt::Debug for KeyedHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyedHash").field("width", &self.width).finish_non_exhaustive()
    }
}

impl KeyedHash {
    pub fn new(key: [u8; 32], width: usize) -> Self {
        Self { key, width }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, width: usize) -> Self {
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Self { key, width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn eval(&self, input: &[u8]) -> CodeWord {
        let mut out = Vec::with_capacity(self.width + 32);
        let mut counter: u8 = 1;
        while out.len() < self.width {
            let mut mac = HmacSha3::new_from_slice(&self.key).expect("HMAC accepts any key length");
            mac.update(&[counter]);
            mac.update(input);
            out.extend_from_slice(&mac.finalize().into_bytes());
            counter = counter.wrapping_add(1);
        }
        out.truncate(self.width);
        CodeWord(out)
    }

    pub fn eval_parts(&self, parts: &[&[u8]]) -> CodeWord {
        let mut buf = Vec::new();
        for p in parts {
            buf.extend_from_slice(&(p.len() as u32).to_be_bytes());
            buf.extend_from_slice(p);
        }
        self.eval(&buf)
    }
}

/// Unkeyed SHA3-256 digest stretched or truncated to `width` bytes.
pub fn digest_word(parts: &[&[u8]], width: usize) -> CodeWord {
    let mut out = Vec::with_capacity(width + 32);
    let mut counter: u8 = 1;
    while out.len() < width {
        let mut h = Sha3_256::new();
        h.update([counter]);
        for p in parts {
            h.update(p);
        }
        out.extend_from_slice(&h.finalize());
        counter = counter.wrapping_add(1);
    }
    out.truncate(width);
    CodeWord(out)
}

/// Agent-side step of the chain: `code2 = H_agent(code1)`.
pub fn derive_code2(h_agent: &KeyedHash, code1: &CodeWord) -> CodeWord {
    h_agent.eval(code1.as_bytes())
}

/// Node-side step of the chain: `code3 = H_node(code2)`.
pub fn derive_code3(h_node: &KeyedHash, code2: &CodeWord) -> CodeWord {
    h_node.eval(code2.as_bytes())
}

/// A small bit field of `width` bits. With the default width of two, the
/// upper bit is the valid bit and the lower bit is the agent bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DataBits {
    width: u8,
    value: u32,
}

pub type DataCode = DataBits;

impl DataBits {
    pub const DEFAULT_WIDTH: u8 = 2;

    pub fn new(width: u8, value: u32) -> Result<Self, CryptoError> {
        if width == 0 || width > 32 {
            return Err(CryptoError::InvalidWidth(width as usize));
        }
        if width < 32 && value >> width != 0 {
            return Err(CryptoError::InvalidWidth(width as usize));
        }
        Ok(Self { width, value })
    }

    /// Packs a (valid, agent) pair into a field of the given width.
    pub fn from_flags(width: u8, valid: bool, agent: bool) -> Result<Self, CryptoError> {
        if width < 2 {
            return Err(CryptoError::InvalidWidth(width as usize));
        }
        Self::new(width, ((valid as u32) << (width - 1)) | agent as u32)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, width: u8) -> Self {
        let mask = if width >= 32 { u32::MAX } else { (1u32 << width) - 1 };
        Self {
            width,
            value: rng.gen::<u32>() & mask,
        }
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn byte_len(&self) -> usize {
        (self.width as usize).div_ceil(8)
    }

    pub fn valid_bit(&self) -> bool {
        (self.value >> (self.width - 1)) & 1 == 1
    }

    pub fn agent_bit(&self) -> bool {
        self.value & 1 == 1
    }
}

/// Combines data bits with the data code by exclusive-or.
pub fn mask_data(code: &DataCode, data: &DataBits) -> Result<DataBits, CryptoError> {
    if code.width != data.width {
        return Err(CryptoError::WidthMismatch {
            expected: code.width as usize,
            got: data.width as usize,
        });
    }
    Ok(DataBits {
        width: data.width,
        value: data.value ^ code.value,
    })
}

pub fn unmask_data(code: &DataCode, masked: &DataBits) -> Result<DataBits, CryptoError> {
    mask_data(code, masked)
}

/// The three provisioned codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeChain {
    pub code1: CodeWord,
    pub code2: CodeWord,
    pub code3: CodeWord,
}

/// What a provisioned node stores before deployment.
#[derive(Debug, Clone)]
pub struct NodeCodes {
    pub code1: CodeWord,
    pub code2: CodeWord,
    pub h_node: KeyedHash,
}

/// What a genuine agent program carries.
#[derive(Debug, Clone)]
pub struct AgentKit {
    pub h_agent: KeyedHash,
    pub code3_expected: CodeWord,
    pub data_code: DataCode,
}

/// Everything handed out by the operator before deployment: two independent
/// hash keys, the code chain and the data code.
#[derive(Debug, Clone)]
pub struct NetworkSecrets {
    pub h_agent: KeyedHash,
    pub h_node: KeyedHash,
    pub chain: CodeChain,
    pub data_code: DataCode,
}

impl NetworkSecrets {
    pub fn provision<R: Rng + ?Sized>(rng: &mut R, code_width: usize, data_width: u8) -> Self {
        let h_agent = KeyedHash::random(rng, code_width);
        let h_node = KeyedHash::random(rng, code_width);
        let code1 = CodeWord::random(rng, code_width);
        let code2 = derive_code2(&h_agent, &code1);
        let code3 = derive_code3(&h_node, &code2);
        let mut data_code = DataBits::random(rng, data_width);
        if data_code.value == 0 {
            data_code.value = 1;
        }
        Self {
            h_agent,
            h_node,
            chain: CodeChain { code1, code2, code3 },
            data_code,
        }
    }

    pub fn code_width(&self) -> usize {
        self.h_agent.width()
    }

    pub fn node_codes(&self) -> NodeCodes {
        NodeCodes {
            code1: self.chain.code1.clone(),
            code2: self.chain.code2.clone(),
            h_node: self.h_node.clone(),
        }
    }

    pub fn agent_kit(&self) -> AgentKit {
        AgentKit {
            h_agent: self.h_agent.clone(),
            code3_expected: self.chain.code3.clone(),
            data_code: self.data_code,
        }
    }
}

/// Adversary-side forging key. Enemy nodes and fake agents use it in place
/// of the network hash functions they do not have.
#[derive(Debug, Clone)]
pub struct ForgeKit {
    pub h_forge: KeyedHash,
}

impl ForgeKit {
    pub fn generate<R: Rng + ?Sized>(rng: &mut R, width: usize) -> Self {
        Self {
            h_forge: KeyedHash::random(rng, width),
        }
    }

    pub fn forge(&self, label: &[u8], nonce: u64) -> CodeWord {
        self.h_forge.eval_parts(&[label, &nonce.to_be_bytes()])
    }
}
