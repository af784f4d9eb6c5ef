//! JSON input formats and the bundled fixtures.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fans::{self, Fan, FanInput};

pub const KEY_EXAMPLE: &str = include_str!("../fixtures/keyexample.json");
pub const KEY_EXAMPLE_COARSE: &str = include_str!("../fixtures/keyexample-coarse.json");
pub const EXPLICIT_PAIRING: &str = include_str!("../fixtures/explicit-pairing.json");

pub fn parse_fan(json: &str) -> Result<FanInput> {
    serde_json::from_str(json).map_err(|e| Error::Input(format!("fan JSON: {e}")))
}

pub fn load_fan(json: &str) -> Result<Fan> {
    fans::validate_fan(&parse_fan(json)?)
}

pub fn key_example() -> Fan {
    load_fan(KEY_EXAMPLE).expect("bundled fixture")
}

pub fn key_example_coarse() -> Fan {
    load_fan(KEY_EXAMPLE_COARSE).expect("bundled fixture")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyTermInput {
    pub coeff: fans::RationalText,
    pub monomial: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingEntryInput {
    pub c: Vec<i64>,
    pub d: Vec<i64>,
    pub poly: Vec<PolyTermInput>,
}

/// One entry `p_{c,d}(x)` of a candidate pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingEntry {
    pub c: Vec<i64>,
    pub d: Vec<i64>,
    pub poly: Vec<(BigRational, Vec<u32>)>,
}

pub fn parse_pairing(json: &str, fan: &Fan) -> Result<Vec<PairingEntry>> {
    let raw: Vec<PairingEntryInput> =
        serde_json::from_str(json).map_err(|e| Error::Input(format!("pairing JSON: {e}")))?;
    raw.into_iter()
        .enumerate()
        .map(|(k, e)| {
            if e.c.len() != fan.rank || e.d.len() != fan.rank {
                return Err(Error::Input(format!(
                    "entry {k}: c and d need {} coordinates",
                    fan.rank
                )));
            }
            let poly = e
                .poly
                .into_iter()
                .map(|t| {
                    if t.monomial.len() != fan.n() {
                        return Err(Error::Input(format!("entry {k}: monomial needs {} exponents", fan.n())));
                    }
                    Ok((t.coeff.parse()?, t.monomial))
                })
                .collect::<Result<_>>()?;
            Ok(PairingEntry { c: e.c, d: e.d, poly })
        })
        .collect()
}

pub fn explicit_pairing(fan: &Fan) -> Vec<PairingEntry> {
    parse_pairing(EXPLICIT_PAIRING, fan).expect("bundled fixture")
}
