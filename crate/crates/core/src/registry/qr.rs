//! Payload printed on the QR code attached to each physical resource.

use std::fmt;

use super::{is_valid_item_id, ItemId, RegistryError};

const PREFIX: &str = "twin://item/";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QrPayload(String);

impl QrPayload {
    pub fn for_item(id: &ItemId) -> Self {
        QrPayload(format!("{PREFIX}{id}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn decode(payload: &str) -> Result<ItemId, RegistryError> {
        let payload = payload.trim();
        match payload.strip_prefix(PREFIX) {
            Some(id) if is_valid_item_id(id) => Ok(ItemId::new(id)),
            _ => Err(RegistryError::MalformedPayload(payload.to_string())),
        }
    }
}

impl fmt::Display for QrPayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_wrong_scheme_and_empty_id() {
        for bad in ["", "twin://item/", "http://item/000X", "twin://item/a b", "twin://item/a/b"] {
            assert!(QrPayload::decode(bad).is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(id in "[A-Za-z0-9_.-]{1,24}") {
            let id = ItemId::new(id);
            let p = QrPayload::for_item(&id);
            prop_assert_eq!(QrPayload::decode(p.as_str()).unwrap(), id);
        }
    }
}
