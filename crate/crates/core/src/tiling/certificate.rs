use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::action::GroupElement;
use crate::cone::PolyCone;
use crate::num::QVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    PolyhedralType,
    FundamentalDomain,
    FaceDescent,
    Glue,
    Decomposition,
    SystemValidation,
    Stabilizer,
    Product,
}

/// Ordered from best to worst so that `max` aggregates verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    VerifiedOnSamples,
    BudgetExhausted,
    Refuted,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::VerifiedOnSamples => 0,
            Verdict::Refuted => 2,
            Verdict::BudgetExhausted => 3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuel: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_bound: Option<i64>,
}

/// One named sub-check of a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

/// Exact data backing a failed or notable check. Every refutation carries
/// at least one witness that can be re-verified on its own.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub role: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<QVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<GroupElement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<PolyCone>,
}

impl Witness {
    pub fn point(role: &str, p: QVector) -> Self {
        Witness {
            role: role.to_string(),
            point: Some(p),
            element: None,
            cone: None,
        }
    }

    pub fn element(role: &str, g: GroupElement) -> Self {
        Witness {
            role: role.to_string(),
            point: None,
            element: Some(g),
            cone: None,
        }
    }

    pub fn cone(role: &str, c: PolyCone) -> Self {
        Witness {
            role: role.to_string(),
            point: None,
            element: None,
            cone: Some(c),
        }
    }

    pub fn with_point(mut self, p: QVector) -> Self {
        self.point = Some(p);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub input_digest: String,
    pub parameters: Parameters,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(kind: CertificateKind, input_digest: String, parameters: Parameters) -> Self {
        Certificate {
            kind,
            input_digest,
            parameters,
            verdict: Verdict::VerifiedOnSamples,
            checks: Vec::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Records a sub-check; the overall verdict is the worst one seen.
    pub fn check(&mut self, name: &str, verdict: Verdict, detail: impl Into<String>) {
        self.verdict = self.verdict.max(verdict);
        self.checks.push(Check {
            name: name.to_string(),
            verdict,
            detail: detail.into(),
        });
    }

    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::VerifiedOnSamples
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Hex SHA-256 of the JSON encoding of `value`.
pub fn digest<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable inputs");
    hex::encode(Sha256::digest(&bytes))
}
