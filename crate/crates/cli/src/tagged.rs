//! Enums keyed by a `"kind"` field. serde's internally tagged derive buffers
//! the body, which hides the path to a bad key; these re-key the object as
//! `{kind: body}` and deserialize it externally tagged instead.

use serde::de::{DeserializeOwned, Error};
use serde::Deserializer;
use serde_json::{Map, Value};

/// Separates a nested key path from the message in a custom error.
const MARK: char = '\u{1}';

pub(crate) fn untag<'de, D: Deserializer<'de>, T: DeserializeOwned>(d: D) -> Result<T, D::Error> {
    let mut body: Map<String, Value> = serde::Deserialize::deserialize(d)?;
    let kind = match body.remove("kind") {
        Some(Value::String(k)) => k,
        Some(_) => return Err(D::Error::custom("`kind` must be a string")),
        None => return Err(D::Error::missing_field("kind")),
    };
    let keyed = Value::Object(Map::from_iter([(kind, Value::Object(body))]));
    serde_path_to_error::deserialize(keyed).map_err(|e| {
        let outer = e.path().to_string();
        let text = e.inner().to_string();
        let (nested, message) = split_path(&text);
        let path = [outer.split_once('.').map(|(_, rest)| rest), nested]
            .into_iter()
            .flatten()
            .filter(|p| !p.is_empty() && *p != ".")
            .collect::<Vec<_>>()
            .join(".");
        if path.is_empty() {
            D::Error::custom(message)
        } else {
            D::Error::custom(format!("{MARK}{path}{MARK}{message}"))
        }
    })
}

/// Splits a message produced by [`untag`] into its nested path and text.
pub(crate) fn split_path(message: &str) -> (Option<&str>, &str) {
    message
        .strip_prefix(MARK)
        .and_then(|rest| rest.split_once(MARK))
        .map_or((None, message), |(path, text)| (Some(path), text))
}

macro_rules! kind_tagged {
    (
        $(#[$em:meta])*
        pub enum $name:ident {
            $(
                $(#[$vm:meta])*
                $var:ident { $( $(#[$fm:meta])* $field:ident : $ty:ty ),* $(,)? }
            ),* $(,)?
        }
    ) => {
        $(#[$em])*
        #[derive(serde::Serialize)]
        #[serde(tag = "kind", rename_all = "kebab-case")]
        pub enum $name {
            $( $(#[$vm])* $var { $( $(#[$fm])* $field: $ty ),* } ),*
        }

        impl<'de> serde::Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                #[derive(serde::Deserialize)]
                #[serde(rename_all = "kebab-case", deny_unknown_fields)]
                enum Keyed {
                    $( $var { $( $(#[$fm])* $field: $ty ),* } ),*
                }
                Ok(match $crate::tagged::untag::<D, Keyed>(d)? {
                    $( Keyed::$var { $($field),* } => $name::$var { $($field),* } ),*
                })
            }
        }
    };
}

pub(crate) use kind_tagged;
