//! TOML key files.
//!
//! ```toml
//! kind = "meta"            # or "viewing-key", "private"
//! params = "kyber512"
//! spend-public = "<base64>"
//! view-public = "<base64>"
//! view-secret = "<base64>"  # viewing-key and private only
//! spend-secret = "<base64>" # private only
//! ```
//!
//! Secrets are the full KEM decapsulation keys `s ∥ z ∥ pk`.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kem::{KemSecretKey, PkePublicKey};
use crate::lattice::params::ParamSet;
use crate::sap::{RecipientKeys, StealthMetaAddress, ViewingKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyFileKind {
    Meta,
    ViewingKey,
    Private,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Document {
    kind: KeyFileKind,
    params: String,
    spend_public: String,
    view_public: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    view_secret: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spend_secret: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeyFile {
    Meta(StealthMetaAddress),
    Viewing(ViewingKey),
    Private(RecipientKeys),
}

fn decode(field: &str, value: &str) -> Result<Vec<u8>> {
    B64.decode(value.trim())
        .map_err(|e| Error::Format(format!("{field}: invalid base64: {e}")))
}

impl KeyFile {
    pub fn kind(&self) -> KeyFileKind {
        match self {
            KeyFile::Meta(_) => KeyFileKind::Meta,
            KeyFile::Viewing(_) => KeyFileKind::ViewingKey,
            KeyFile::Private(_) => KeyFileKind::Private,
        }
    }

    pub fn params(&self) -> &ParamSet {
        match self {
            KeyFile::Meta(m) => m.params(),
            KeyFile::Viewing(v) => v.params(),
            KeyFile::Private(k) => k.params(),
        }
    }

    pub fn meta(&self) -> StealthMetaAddress {
        match self {
            KeyFile::Meta(m) => m.clone(),
            KeyFile::Viewing(v) => v.meta(),
            KeyFile::Private(k) => k.meta(),
        }
    }

    pub fn viewing_key(&self) -> Option<ViewingKey> {
        match self {
            KeyFile::Meta(_) => None,
            KeyFile::Viewing(v) => Some(v.clone()),
            KeyFile::Private(k) => Some(k.viewing_key()),
        }
    }

    pub fn to_toml(&self) -> String {
        let meta = self.meta();
        let (view_secret, spend_secret) = match self {
            KeyFile::Meta(_) => (None, None),
            KeyFile::Viewing(v) => (Some(v.view_secret()), None),
            KeyFile::Private(k) => (Some(k.view_secret()), Some(k.spend_secret())),
        };
        let doc = Document {
            kind: self.kind(),
            params: self.params().name.to_string(),
            spend_public: B64.encode(meta.spend_key().to_bytes()),
            view_public: B64.encode(meta.view_key().to_bytes()),
            view_secret: view_secret.map(|s| B64.encode(s.to_bytes())),
            spend_secret: spend_secret.map(|s| B64.encode(s.to_bytes())),
        };
        toml::to_string(&doc).expect("key documents always serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: Document = toml::from_str(text).map_err(|e| Error::Format(format!("key file: {e}")))?;
        let params = ParamSet::by_name(&doc.params)?;
        let spend = PkePublicKey::from_bytes(&decode("spend-public", &doc.spend_public)?, &params)?;
        let view = PkePublicKey::from_bytes(&decode("view-public", &doc.view_public)?, &params)?;
        let secret = |field: &str, value: &Option<String>, public: &PkePublicKey| -> Result<KemSecretKey> {
            let value = value
                .as_ref()
                .ok_or_else(|| Error::Format(format!("key file is missing {field}")))?;
            let sk = KemSecretKey::from_bytes(&decode(field, value)?, &params)?;
            if sk.public_key() != public {
                return Err(Error::Format(format!("{field} does not match its public key")));
            }
            Ok(sk)
        };
        let unexpected = |field: &str, value: &Option<String>| -> Result<()> {
            match value {
                Some(_) => Err(Error::Format(format!("{field} not allowed in this key file kind"))),
                None => Ok(()),
            }
        };
        match doc.kind {
            KeyFileKind::Meta => {
                unexpected("view-secret", &doc.view_secret)?;
                unexpected("spend-secret", &doc.spend_secret)?;
                Ok(KeyFile::Meta(StealthMetaAddress::new(spend, view)?))
            }
            KeyFileKind::ViewingKey => {
                unexpected("spend-secret", &doc.spend_secret)?;
                let v = secret("view-secret", &doc.view_secret, &view)?;
                Ok(KeyFile::Viewing(ViewingKey::new(v, spend)?))
            }
            KeyFileKind::Private => {
                let v = secret("view-secret", &doc.view_secret, &view)?;
                let k = secret("spend-secret", &doc.spend_secret, &spend)?;
                Ok(KeyFile::Private(RecipientKeys::new(k, v)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::params::{KYBER512, RLWE512};
    use crate::sap::generate_meta;

    #[test]
    fn round_trips_every_kind() {
        let (keys, meta) = generate_meta(b"file", &RLWE512).unwrap();
        for file in [
            KeyFile::Meta(meta.clone()),
            KeyFile::Viewing(keys.viewing_key()),
            KeyFile::Private(keys.clone()),
        ] {
            let text = file.to_toml();
            assert!(text.contains("params = \"rlwe512\""));
            assert_eq!(KeyFile::from_toml(&text).unwrap(), file);
            assert_eq!(file.meta(), meta);
        }
        let viewing = KeyFile::Viewing(keys.viewing_key()).to_toml();
        assert!(!viewing.contains("spend-secret"));
        assert!(KeyFile::Meta(meta).to_toml().lines().count() == 4);
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let (keys, _) = generate_meta(b"file", &KYBER512).unwrap();
        let (other, _) = generate_meta(b"other", &KYBER512).unwrap();
        let text = KeyFile::Private(keys.clone()).to_toml();
        // swap in a foreign view public key
        let foreign = B64.encode(other.view_secret().public_key().to_bytes());
        let mut doc: Document = toml::from_str(&text).unwrap();
        doc.view_public = foreign;
        assert!(KeyFile::from_toml(&toml::to_string(&doc).unwrap()).is_err());

        let mut doc: Document = toml::from_str(&text).unwrap();
        doc.kind = KeyFileKind::Meta;
        assert!(KeyFile::from_toml(&toml::to_string(&doc).unwrap()).is_err());

        let mut doc: Document = toml::from_str(&text).unwrap();
        doc.params = "kyber768".into();
        assert!(KeyFile::from_toml(&toml::to_string(&doc).unwrap()).is_err());

        let mut doc: Document = toml::from_str(&text).unwrap();
        doc.params = "kyber9000".into();
        assert!(matches!(
            KeyFile::from_toml(&toml::to_string(&doc).unwrap()),
            Err(Error::UnknownParamSet(_))
        ));
        assert!(KeyFile::from_toml("kind = \"meta\"").is_err());
        assert!(KeyFile::from_toml(&text.replace("spend-public = \"", "spend-public = \"!")).is_err());
    }
}
