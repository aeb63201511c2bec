//! Fixed vocabulary for synthetic documents.

pub const CATEGORIES: &[&str] = &[
    "Name",
    "Email address",
    "Postal address",
    "Phone number",
    "Date of birth",
    "IP address",
    "Device identifier",
    "Location data",
    "Payment data",
    "Purchase history",
    "Browsing behaviour",
    "Health data",
    "Account credentials",
    "Usage statistics",
];

pub const PURPOSES: &[&str] = &[
    "Service provision",
    "Customer support",
    "Marketing",
    "Analytics",
    "Fraud prevention",
    "Legal compliance",
    "Billing",
    "Personalisation",
    "Security",
    "Research",
];

/// Recipients that are not generated controllers.
pub const EXTERNAL_RECIPIENTS: &[&str] = &[
    "Cloud Hosting Services Ltd",
    "Payment Processing GmbH",
    "Ad Network Inc",
    "Analytics Provider LLC",
    "Customer Care Outsourcing AG",
    "Tax Authority",
    "Logistics Partner SE",
];

/// `(description, ISO 8601 duration)`.
pub const STORAGE: &[(&str, &str)] = &[
    ("30 days", "P30D"),
    ("6 months", "P6M"),
    ("1 year", "P1Y"),
    ("3 years", "P3Y"),
    ("10 years", "P10Y"),
];

pub const COUNTRIES: &[&str] = &["DE", "FR", "NL", "AT", "IE", "ES", "IT"];

pub const THIRD_COUNTRIES: &[&str] = &["US", "IN", "CN", "GB", "CH"];

/// Sector assigned to uniform cluster `k` is `SECTORS[k % len]`.
pub const SECTORS: &[&str] = &["J62", "G47", "K64", "M70", "C10", "H49", "Q86", "N82", "I56", "P85"];

pub const LEGAL_BASIS_LETTERS: [char; 6] = ['a', 'b', 'c', 'd', 'e', 'f'];
