//! [`ContractExecutor`] backed by an Ethereum JSON-RPC endpoint, meant for a
//! private copy of the chain with an unlocked caller account.

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use super::probe::{ContractExecutor, ExecutorError, Invocation};
use super::selector::Selector;
use crate::primitives::Address;

pub struct RpcExecutor {
    url: String,
    caller: Address,
    call_gas: u64,
    receipt_polls: u32,
    poll_interval: Duration,
    next_id: AtomicU64,
}

impl RpcExecutor {
    pub fn new(url: impl Into<String>, caller: Address) -> Self {
        RpcExecutor {
            url: url.into(),
            caller,
            call_gas: 100_000,
            receipt_polls: 30,
            poll_interval: Duration::from_millis(500),
            next_id: AtomicU64::new(1),
        }
    }

    fn call(&self, method: &str, params: Value) -> Result<Value, ExecutorError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let body = json!({"jsonrpc": "2.0", "id": id, "method": method, "params": params});
        let mut resp = ureq::post(&self.url)
            .send_json(&body)
            .map_err(|e| ExecutorError::Failure(format!("{method}: {e}")))?;
        let v: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| ExecutorError::Failure(format!("{method}: bad response: {e}")))?;
        if let Some(err) = v.get("error") {
            return Err(ExecutorError::Reverted(format!("{method}: {err}")));
        }
        Ok(v.get("result").cloned().unwrap_or(Value::Null))
    }

    fn quantity(v: &Value) -> Result<u64, ExecutorError> {
        let s = v.as_str().ok_or_else(|| ExecutorError::Failure(format!("expected quantity, got {v}")))?;
        u64::from_str_radix(s.trim_start_matches("0x"), 16)
            .map_err(|_| ExecutorError::Failure(format!("bad quantity {s}")))
    }

    /// Beneficiary of a SELFDESTRUCT frame in a call trace, if any.
    fn selfdestruct_beneficiary(frame: &Value) -> Option<Address> {
        if frame.get("type").and_then(Value::as_str) == Some("SELFDESTRUCT") {
            return frame.get("to").and_then(Value::as_str).and_then(|s| s.parse().ok());
        }
        frame.get("calls")?.as_array()?.iter().find_map(Self::selfdestruct_beneficiary)
    }
}

impl ContractExecutor for RpcExecutor {
    fn estimate_gas(&self, contract: &Address, selector: &Selector) -> Result<u64, ExecutorError> {
        let tx = json!({"from": self.caller.to_string(), "to": contract.to_string(), "data": selector.to_string()});
        Self::quantity(&self.call("eth_estimateGas", json!([tx]))?)
    }

    fn invoke(&self, contract: &Address, selector: &Selector, caller: &Address) -> Result<Invocation, ExecutorError> {
        let tx = json!({
            "from": caller.to_string(),
            "to": contract.to_string(),
            "data": selector.to_string(),
            "gas": format!("0x{:x}", self.call_gas),
        });
        let hash = self.call("eth_sendTransaction", json!([tx]))?;
        let mut receipt = Value::Null;
        for _ in 0..self.receipt_polls {
            receipt = self.call("eth_getTransactionReceipt", json!([hash]))?;
            if !receipt.is_null() {
                break;
            }
            thread::sleep(self.poll_interval);
        }
        if receipt.is_null() {
            return Err(ExecutorError::Failure(format!("no receipt for {hash}")));
        }
        let gas_used = Self::quantity(receipt.get("gasUsed").unwrap_or(&Value::Null))?;
        let code = self.call("eth_getCode", json!([contract.to_string(), "latest"]))?;
        let terminated = matches!(code.as_str(), Some("0x") | Some(""));
        let refund_to = if terminated {
            self.call("debug_traceTransaction", json!([hash, {"tracer": "callTracer"}]))
                .ok()
                .and_then(|t| Self::selfdestruct_beneficiary(&t))
        } else {
            None
        };
        Ok(Invocation { terminated, refund_to, gas_used })
    }

    fn concurrent(&self) -> bool {
        false
    }
}
