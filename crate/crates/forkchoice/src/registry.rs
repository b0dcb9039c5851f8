use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use pvm_core::Bound;

use crate::{FcError, ForkChoice, ForkChoiceKind, Ghost, GhostEph, LmdGhost, RlmdGhost};

type Constructor = fn(Option<Bound>) -> Result<ForkChoiceKind, FcError>;

/// Fork-choice rules selectable by name.
pub struct Registry {
    entries: BTreeMap<&'static str, Constructor>,
}

fn no_param(name: &'static str, kind: ForkChoiceKind, arg: Option<Bound>) -> Result<ForkChoiceKind, FcError> {
    match arg {
        None => Ok(kind),
        Some(a) => Err(FcError::BadParameter(format!("{name} takes no parameter, got {a}"))),
    }
}

impl Registry {
    pub fn with_builtins() -> Self {
        let mut r = Registry { entries: BTreeMap::new() };
        r.register("ghost", |a| no_param("ghost", ForkChoiceKind::Ghost, a));
        r.register("lmd_ghost", |a| no_param("lmd_ghost", ForkChoiceKind::LmdGhost, a));
        r.register("ghost_eph", |a| no_param("ghost_eph", ForkChoiceKind::GhostEph, a));
        r.register("rlmd_ghost", |a| match a {
            Some(Bound::Finite(0)) => Err(FcError::BadParameter("rlmd_ghost needs η ≥ 1".into())),
            Some(eta) => Ok(ForkChoiceKind::RlmdGhost(eta)),
            None => Err(FcError::BadParameter("rlmd_ghost needs an expiry, e.g. rlmd_ghost(3)".into())),
        });
        r
    }

    pub fn register(&mut self, name: &'static str, ctor: Constructor) {
        self.entries.insert(name, ctor);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn kind(&self, name: &str, arg: Option<Bound>) -> Result<ForkChoiceKind, FcError> {
        let ctor = self
            .entries
            .get(name)
            .ok_or_else(|| FcError::UnknownRule(name.to_string()))?;
        ctor(arg)
    }

    /// Parses `name` or `name(arg)` and instantiates the rule.
    pub fn build(&self, name: &str) -> Result<Arc<dyn ForkChoice>, FcError> {
        Ok(instantiate(name.parse()?))
    }
}

pub fn instantiate(kind: ForkChoiceKind) -> Arc<dyn ForkChoice> {
    match kind {
        ForkChoiceKind::Ghost => Arc::new(Ghost),
        ForkChoiceKind::LmdGhost => Arc::new(LmdGhost),
        ForkChoiceKind::GhostEph => Arc::new(GhostEph),
        ForkChoiceKind::RlmdGhost(eta) => Arc::new(RlmdGhost { eta }),
    }
}

pub fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(Registry::with_builtins)
}
