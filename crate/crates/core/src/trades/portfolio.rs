//! Portfolio JSON documents (`"schema": "rsaccr-1"`).
//!
//! ```json
//! {
//!   "schema": "rsaccr-1",
//!   "trades": [{
//!     "id": "swap-1", "currency": "USD", "margined": false,
//!     "legs": [
//!       {"direction": "pay", "kind": {"type": "fixed", "rate": 0.03},
//!        "notional": [[0.0, 100000000.0]], "frequency": 0.25, "start": 0.0, "end": 10.0},
//!       {"direction": "receive", "kind": {"type": "floating", "tenor": 0.25},
//!        "notional": [[0.0, 100000000.0]], "frequency": 0.25, "start": 0.0, "end": 10.0}
//!     ]
//!   }]
//! }
//! ```

use serde::{Deserialize, Serialize};

use super::Trade;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "rsaccr-1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioDocument {
    pub schema: String,
    pub trades: Vec<Trade>,
}

pub fn parse_portfolio(json: &str) -> Result<Vec<Trade>> {
    let doc: PortfolioDocument =
        serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
    if doc.schema != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported portfolio schema '{}', expected '{SCHEMA_VERSION}'",
            doc.schema
        )));
    }
    for t in &doc.trades {
        t.validate()?;
    }
    Ok(doc.trades)
}

pub fn portfolio_to_json(trades: &[Trade]) -> Result<String> {
    let doc = PortfolioDocument {
        schema: SCHEMA_VERSION.to_string(),
        trades: trades.to_vec(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}
