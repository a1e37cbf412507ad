//! Service-oriented digital twin core.
//!
//! The crate is layered bottom-up:
//!
//! * [`registry`] holds the digital twins of the plant's resources: static
//!   attributes, custom attributes bound to sensor streams and the
//!   time-stamped state history.
//! * [`bus`] is the enterprise service bus that routes REST-style requests
//!   to registered producers.
//! * [`sim`] is a seedable stand-in for the physical plant (machines with
//!   sensors, wear and alarms; the four-step carton line).
//! * [`services`] implements the twin services on top of the registry and
//!   simulator and exposes them as bus producers.
//! * [`search`] is the inverted index and intent matcher behind the text
//!   assistant.
//! * [`stats`] and [`economics`] are the validation battery used to assess
//!   the case-study campaigns.

pub mod bus;
pub mod case_data;
pub mod config;
pub mod economics;
pub mod registry;
pub mod search;
pub mod services;
pub mod sim;
pub mod stats;

mod category;

pub use category::{MaintenanceCategory, Mode};
