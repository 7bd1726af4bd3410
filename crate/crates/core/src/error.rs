use crate::ots::OtsError;

/// Errors from the broadcast-encryption algorithms.
///
/// The `NotRecipient`, `InvalidHeader`, `InvalidSignature` and
/// `MalformedHeader` variants are the ⊥ outcomes of decapsulation; see
/// [`Error::is_rejection`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("capacity must be at least 1")]
    ZeroCapacity,
    #[error("capacity {0} exceeds the supported maximum")]
    CapacityTooLarge(usize),
    #[error("index {index} outside [1, {capacity}]")]
    IndexOutOfRange { index: usize, capacity: usize },
    #[error("recipient set is empty")]
    EmptyRecipientSet,
    #[error("no public key for index {0}")]
    MissingPublicKey(usize),
    #[error("public key for index {0} is structurally invalid")]
    MalformedPublicKey(usize),
    #[error("key belongs to index {found}, expected {expected}")]
    KeyIndexMismatch { expected: usize, found: usize },
    #[error("key capacity {found} does not match parameters ({expected})")]
    CapacityMismatch { expected: usize, found: usize },
    #[error("index {0} not in recipient set")]
    NotRecipient(usize),
    #[error("ciphertext header failed the validity check")]
    InvalidHeader,
    #[error("ciphertext header signature is invalid")]
    InvalidSignature,
    #[error("ciphertext header is malformed")]
    MalformedHeader,
    #[error(transparent)]
    Ots(#[from] OtsError),
}

impl Error {
    /// Whether this is a ⊥ outcome of decapsulation rather than a caller error.
    pub fn is_rejection(&self) -> bool {
        matches!(
            self,
            Error::NotRecipient(_)
                | Error::InvalidHeader
                | Error::InvalidSignature
                | Error::MalformedHeader
        )
    }
}
