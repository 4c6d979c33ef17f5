//! Certificate documents: serialization, window descriptors and digests.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::crossed::{CPElem, PIWitness};
use crate::error::{Error, Result};
use crate::group::{Elem, GroupSpec, Window};
use crate::paradox::{DeficiencyCert, FlowCert, FlowDeficiency, MatchCert, ParadoxWitness};

pub const SCHEMA: &str = "paradox-cert/v1";
pub const PRODUCER: &str = concat!("paradox ", env!("CARGO_PKG_VERSION"));

/// A ball of the given radius, or an explicit element list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowDesc {
    pub radius: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<String>>,
}

impl WindowDesc {
    pub fn of(w: &Window) -> Self {
        WindowDesc {
            radius: w.radius(),
            elements: w.is_explicit().then(|| strings(w.elements())),
        }
    }

    pub fn build(&self, group: GroupSpec) -> Result<Window> {
        match &self.elements {
            None => Ok(group.ball(self.radius)),
            Some(list) => Window::explicit(group, parse_all(group, list)?, self.radius),
        }
    }
}

/// One term `q 1_A u_t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpTerm {
    pub q: String,
    pub set: String,
    pub t: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Match {
        set: String,
        translators: Vec<String>,
        assignment: Vec<[String; 3]>,
    },
    Deficiency {
        set: String,
        translators: Vec<String>,
        violator: Vec<String>,
        neighborhood: usize,
    },
    Witness {
        set: String,
        parts: Vec<[String; 2]>,
        split: usize,
    },
    Flow {
        m: usize,
        n: usize,
        set: String,
        #[serde(rename = "setB")]
        set_b: String,
        translators: Vec<String>,
        assignment: Vec<(String, Vec<String>)>,
    },
    FlowDeficiency {
        m: usize,
        n: usize,
        set: String,
        #[serde(rename = "setB")]
        set_b: String,
        translators: Vec<String>,
        violator: Vec<String>,
        neighborhood: usize,
    },
    CpWitness {
        set: String,
        parts: Vec<[String; 2]>,
        split: usize,
        v: Vec<CpTerm>,
        w: Vec<CpTerm>,
    },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Match { .. } => "match",
            Payload::Deficiency { .. } => "deficiency",
            Payload::Witness { .. } => "witness",
            Payload::Flow { .. } => "flow",
            Payload::FlowDeficiency { .. } => "flow-deficiency",
            Payload::CpWitness { .. } => "cp-witness",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    #[serde(flatten)]
    pub payload: Payload,
    pub group: String,
    pub window: WindowDesc,
    #[serde(rename = "checkedOn")]
    pub checked_on: String,
    pub producer: String,
    pub digest: String,
}

fn strings<'a>(xs: impl IntoIterator<Item = &'a Elem>) -> Vec<String> {
    xs.into_iter().map(|g| g.to_string()).collect()
}

pub fn parse_all(group: GroupSpec, xs: &[String]) -> Result<Vec<Elem>> {
    xs.iter().map(|s| group.parse_elem(s)).collect()
}

fn parts_of(wit: &ParadoxWitness) -> Vec<[String; 2]> {
    wit.parts.iter().map(|(a, t)| [a.to_string(), t.to_string()]).collect()
}

pub fn cp_terms(x: &CPElem) -> Vec<CpTerm> {
    x.terms()
        .flat_map(|(t, c)| {
            c.iter().map(move |(q, a)| CpTerm { q: q.to_string(), set: a.to_string(), t: t.to_string() })
        })
        .collect()
}

impl Certificate {
    fn seal(group: GroupSpec, w: &Window, payload: Payload) -> Self {
        let mut c = Certificate {
            schema: SCHEMA.to_string(),
            payload,
            group: group.to_string(),
            window: WindowDesc::of(w),
            checked_on: w.digest(),
            producer: PRODUCER.to_string(),
            digest: String::new(),
        };
        c.digest = c.compute_digest();
        c
    }

    pub fn from_match(c: &MatchCert) -> Self {
        let assignment = c.assignment.iter().map(|(x, s1, s2)| [x.to_string(), s1.to_string(), s2.to_string()]);
        let payload = Payload::Match {
            set: c.set.to_string(),
            translators: strings(&c.translators),
            assignment: assignment.collect(),
        };
        Certificate::seal(c.window.group(), &c.window, payload)
    }

    pub fn from_deficiency(c: &DeficiencyCert) -> Self {
        let payload = Payload::Deficiency {
            set: c.set.to_string(),
            translators: strings(&c.translators),
            violator: strings(&c.violator),
            neighborhood: c.neighborhood,
        };
        Certificate::seal(c.window.group(), &c.window, payload)
    }

    pub fn from_witness(wit: &ParadoxWitness, w: &Window) -> Self {
        let payload = Payload::Witness { set: wit.set.to_string(), parts: parts_of(wit), split: wit.split };
        Certificate::seal(w.group(), w, payload)
    }

    pub fn from_flow(c: &FlowCert) -> Self {
        let payload = Payload::Flow {
            m: c.m,
            n: c.n,
            set: c.set_a.to_string(),
            set_b: c.set_b.to_string(),
            translators: strings(&c.translators),
            assignment: c.assignment.iter().map(|(x, ys)| (x.to_string(), strings(ys))).collect(),
        };
        Certificate::seal(c.window.group(), &c.window, payload)
    }

    pub fn from_flow_deficiency(c: &FlowDeficiency) -> Self {
        let payload = Payload::FlowDeficiency {
            m: c.m,
            n: c.n,
            set: c.set_a.to_string(),
            set_b: c.set_b.to_string(),
            translators: strings(&c.translators),
            violator: strings(&c.violator),
            neighborhood: c.neighborhood,
        };
        Certificate::seal(c.window.group(), &c.window, payload)
    }

    pub fn from_pi_witness(wit: &ParadoxWitness, pw: &PIWitness, w: &Window) -> Self {
        let payload = Payload::CpWitness {
            set: wit.set.to_string(),
            parts: parts_of(wit),
            split: wit.split,
            v: cp_terms(&pw.v),
            w: cp_terms(&pw.w),
        };
        Certificate::seal(w.group(), w, payload)
    }

    pub fn kind(&self) -> &'static str {
        self.payload.kind()
    }

    /// SHA-256 of the canonical JSON of every field except `producer` and
    /// `digest`.
    pub fn compute_digest(&self) -> String {
        let mut v = serde_json::to_value(self).expect("certificates serialize");
        if let Value::Object(map) = &mut v {
            map.remove("producer");
            map.remove("digest");
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificates serialize");
        s.push('\n');
        s
    }

    /// Parses a certificate and checks the schema id; content is not
    /// validated here.
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Certificate = serde_json::from_str(text).map_err(|e| Error::Certificate(e.to_string()))?;
        if c.schema != SCHEMA {
            return Err(Error::Certificate(format!("unsupported schema '{}'", c.schema)));
        }
        Ok(c)
    }

    pub fn group_spec(&self) -> Result<GroupSpec> {
        self.group.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paradox::{doubling_matching, free_semigroup_witness, positive_window, Doubling};
    use crate::sets::{SetExpr, Universe};

    #[test]
    fn match_round_trip_and_digest() {
        let g = GroupSpec::Free(2);
        let u = Universe::new(g);
        let w = g.ball(2);
        let s: Vec<Elem> = g.ball(1).elements().to_vec();
        let Doubling::Match(m) = doubling_matching(&u, &SetExpr::All, &s, &w).unwrap() else { panic!() };
        let c = Certificate::from_match(&m);
        let text = c.to_json();
        assert!(text.contains("\"kind\": \"match\"") && text.contains("\"checkedOn\""));
        let back = Certificate::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.compute_digest(), c.digest);
        let mut other = back.clone();
        other.producer = "someone else".into();
        assert_eq!(other.compute_digest(), c.digest);
        other.group = "free:3".into();
        assert_ne!(other.compute_digest(), c.digest);
    }

    #[test]
    fn explicit_windows_and_schema() {
        let g = GroupSpec::DyadicAffine;
        let s = g.parse_elem("(2,0)").unwrap();
        let t = g.parse_elem("(2,1)").unwrap();
        let wit = free_semigroup_witness(g, &s, &t, 3).unwrap().unwrap();
        let w = positive_window(g, &s, &t, 3).unwrap();
        let c = Certificate::from_witness(&wit, &w);
        assert_eq!(c.window.elements.as_ref().map(|e| e.len()), Some(15));
        assert_eq!(c.window.build(g).unwrap().digest(), c.checked_on);
        let text = c.to_json().replace(SCHEMA, "paradox-cert/v0");
        assert!(matches!(Certificate::from_json(&text), Err(Error::Certificate(_))));
        assert!(Certificate::from_json("{}").is_err());
    }
}
