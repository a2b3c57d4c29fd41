//! Canonical JSON encoding: object keys sorted, floats rendered as the
//! shortest decimal that round-trips. Used for model files, wire
//! messages, and reports so identical values always produce identical
//! bytes.

use serde::Serialize;

/// Serialize to canonical JSON bytes.
///
/// Goes through `serde_json::Value`, whose object representation is a
/// `BTreeMap`, so keys come out sorted regardless of struct field
/// declaration order. Non-finite floats are unrepresentable in JSON and
/// would come out as `null` (and then fail to parse back into `f64`);
/// callers validate finiteness upstream, where the offending row and
/// column can still be named.
pub fn canonical_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let value = serde_json::to_value(value).expect("value serializes to JSON");
    serde_json::to_vec(&value).expect("JSON value encodes")
}

/// Canonical JSON as a `String`.
pub fn canonical_json_string<T: Serialize>(value: &T) -> String {
    String::from_utf8(canonical_json_bytes(value)).expect("JSON is UTF-8")
}
