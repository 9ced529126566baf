use std::fmt;
use std::str::FromStr;

use crate::cost::HockneyParams;

/// Machine parameters and default problem size of one platform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformPreset {
    pub name: &'static str,
    pub params: HockneyParams,
    pub n: u64,
    pub p: u64,
    pub b: u64,
    pub outer_b: u64,
}

pub const GRID5000: PlatformPreset = PlatformPreset {
    name: "grid5000",
    params: HockneyParams {
        alpha: 1e-4,
        beta: 1e-9,
        gamma: 0.0,
    },
    n: 8192,
    p: 128,
    b: 64,
    outer_b: 64,
};

pub const BGP: PlatformPreset = PlatformPreset {
    name: "bgp",
    params: HockneyParams {
        alpha: 3e-6,
        beta: 1e-9,
        gamma: 0.0,
    },
    n: 65536,
    p: 16384,
    b: 256,
    outer_b: 256,
};

/// 500 ns latency, 100 GB/s, a machine-wide rate of 1e18 flop/s.
pub const EXASCALE: PlatformPreset = PlatformPreset {
    name: "exascale",
    params: HockneyParams {
        alpha: 5e-7,
        beta: 1e-11,
        gamma: 1e-18,
    },
    n: 1 << 22,
    p: 1 << 20,
    b: 256,
    outer_b: 256,
};

pub const PRESETS: [PlatformPreset; 3] = [GRID5000, BGP, EXASCALE];

/// `none` selects no preset: every value must then come from flags,
/// environment or a config file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresetChoice {
    None,
    Platform(PlatformPreset),
}

impl PresetChoice {
    pub fn preset(&self) -> Option<&PlatformPreset> {
        match self {
            Self::None => None,
            Self::Platform(p) => Some(p),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Platform(p) => p.name,
        }
    }
}

impl fmt::Display for PresetChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "none" {
            return Ok(Self::None);
        }
        PRESETS
            .iter()
            .find(|p| p.name == s)
            .map(|p| Self::Platform(*p))
            .ok_or_else(|| format!("unknown preset `{s}` (expected none, grid5000, bgp or exascale)"))
    }
}
