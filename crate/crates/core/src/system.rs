//! Mackey systems `(𝔠, 𝔒)` on a finite group.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{Elem, FiniteGroup, SubgroupId};
use crate::gset::GMap;

/// How `𝔒` was supplied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpensForm {
    /// `𝔒(H) = 𝔠(H)` for every `H`.
    Full,
    /// Given on class representatives and transported by conjugation.
    Compressed,
    /// Given for every member of the family.
    Explicit,
}

#[derive(Clone)]
pub struct MackeySystem {
    group: Arc<FiniteGroup>,
    family: Vec<bool>,
    opens: Vec<Vec<SubgroupId>>,
    open_mask: Vec<Vec<bool>>,
    form: OpensForm,
}

impl fmt::Debug for MackeySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MackeySystem")
            .field("family", &self.family_ids())
            .field("form", &self.form)
            .finish()
    }
}

impl PartialEq for MackeySystem {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.group, &other.group)
            && self.family == other.family
            && self.opens == other.opens
    }
}

impl Eq for MackeySystem {}

impl MackeySystem {
    /// All subgroups, with `𝔒(H)` every subgroup of `H`.
    pub fn full(group: Arc<FiniteGroup>) -> Self {
        let all: Vec<SubgroupId> = group.subgroups().iter().map(|s| s.id).collect();
        Self::with_family(group, &all).expect("the full family is valid")
    }

    /// The given family with `𝔒(H) = 𝔠(H)`.
    pub fn with_family(group: Arc<FiniteGroup>, family: &[SubgroupId]) -> Result<Self> {
        let mask = family_mask(&group, family)?;
        let opens = (0..group.num_subgroups())
            .map(|h| {
                if !mask[h] {
                    return Vec::new();
                }
                (0..group.num_subgroups())
                    .filter(|&u| mask[u] && group.is_subgroup_of(SubgroupId(u), SubgroupId(h)))
                    .map(SubgroupId)
                    .collect()
            })
            .collect();
        Ok(Self::assemble(group, mask, opens, OpensForm::Full))
    }

    /// Builds a system from an explicit or compressed assignment `H ↦ 𝔒(H)`.
    ///
    /// The assignment is read as compressed when its keys are exactly the class
    /// representatives of the family, and as explicit when they are exactly the family.
    pub fn from_assignment(
        group: Arc<FiniteGroup>,
        family: &[SubgroupId],
        assignment: &BTreeMap<SubgroupId, Vec<SubgroupId>>,
    ) -> Result<Self> {
        let mask = family_mask(&group, family)?;
        for (h, us) in assignment {
            group.check_id(*h)?;
            for u in us {
                group.check_id(*u)?;
            }
        }
        let members: Vec<SubgroupId> = (0..mask.len())
            .filter(|&h| mask[h])
            .map(SubgroupId)
            .collect();
        let keys: Vec<SubgroupId> = assignment.keys().copied().collect();
        let reps: Vec<SubgroupId> = {
            let mut r: Vec<SubgroupId> = members.iter().map(|&h| group.rep_of(h)).collect();
            r.sort();
            r.dedup();
            r
        };
        let sorted = |v: &[SubgroupId]| {
            let mut v = v.to_vec();
            v.sort();
            v.dedup();
            v
        };
        let mut opens = vec![Vec::new(); group.num_subgroups()];
        let form = if keys == members {
            for (h, us) in assignment {
                opens[h.0] = sorted(us);
            }
            OpensForm::Explicit
        } else if keys == reps && reps.iter().all(|r| mask[r.0]) {
            for &h in &members {
                let rep = group.rep_of(h);
                let back = group.inv(group.subgroup(h).to_rep);
                let us: Vec<SubgroupId> = assignment[&rep]
                    .iter()
                    .map(|&u| group.conjugate(u, back))
                    .collect();
                opens[h.0] = sorted(&us);
            }
            OpensForm::Compressed
        } else {
            let missing = members
                .iter()
                .find(|h| !assignment.contains_key(h))
                .map(|h| h.to_string())
                .unwrap_or_else(|| "a non-member".into());
            return Err(invalid(format!(
                "opens must be given for every family member or every class representative (problem at {missing})"
            )));
        };
        Ok(Self::assemble(group, mask, opens, form))
    }

    fn assemble(
        group: Arc<FiniteGroup>,
        family: Vec<bool>,
        opens: Vec<Vec<SubgroupId>>,
        form: OpensForm,
    ) -> Self {
        let n = group.num_subgroups();
        let open_mask = opens
            .iter()
            .map(|us| {
                let mut m = vec![false; n];
                for u in us {
                    m[u.0] = true;
                }
                m
            })
            .collect();
        MackeySystem {
            group,
            family,
            opens,
            open_mask,
            form,
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn form(&self) -> OpensForm {
        self.form
    }

    pub fn in_family(&self, h: SubgroupId) -> bool {
        self.family.get(h.0).copied().unwrap_or(false)
    }

    pub fn family_ids(&self) -> Vec<SubgroupId> {
        (0..self.family.len())
            .filter(|&h| self.family[h])
            .map(SubgroupId)
            .collect()
    }

    /// Class representatives of the family, in class order.
    pub fn family_reps(&self) -> Vec<SubgroupId> {
        self.group
            .class_reps()
            .into_iter()
            .filter(|&r| self.in_family(r))
            .collect()
    }

    pub fn contains_g(&self) -> bool {
        self.in_family(self.group.whole())
    }

    /// `𝔒(H)`, sorted; empty when `H ∉ 𝔠`.
    pub fn opens(&self, h: SubgroupId) -> &[SubgroupId] {
        &self.opens[h.0]
    }

    /// Whether `U ∈ 𝔒(H)`.
    #[inline]
    pub fn is_open_in(&self, u: SubgroupId, h: SubgroupId) -> bool {
        self.open_mask[h.0][u.0]
    }

    /// The system conjugated by `g`: `𝔠^g` with `𝔒'(H^g) = 𝔒(H)^g`.
    pub fn conjugated(&self, g: Elem) -> Self {
        let grp = &self.group;
        let n = grp.num_subgroups();
        let mut family = vec![false; n];
        let mut opens = vec![Vec::new(); n];
        for h in 0..n {
            if self.family[h] {
                let hg = grp.conjugate(SubgroupId(h), g);
                family[hg.0] = true;
                let mut us: Vec<SubgroupId> =
                    self.opens[h].iter().map(|&u| grp.conjugate(u, g)).collect();
                us.sort();
                opens[hg.0] = us;
            }
        }
        Self::assemble(grp.clone(), family, opens, OpensForm::Explicit)
    }

    /// Checks family closure, `𝔒(H) ⊆ 𝔠(H)`, then axioms (i) to (v) in order.
    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            violation: self.first_violation(),
        }
    }

    fn first_violation(&self) -> Option<Violation> {
        let g = &self.group;
        let fam = self.family_ids();
        for &h in &fam {
            for x in 0..g.order() {
                let hx = g.conjugate(h, x);
                if !self.in_family(hx) {
                    return Some(Violation::new(
                        Axiom::FamilyClosure,
                        Witness::conj(h, None, x),
                        format!("{hx} = {h}^g is not in the family"),
                    ));
                }
            }
            for &k in &fam {
                let i = g.intersection(h, k);
                if !self.in_family(i) {
                    return Some(Violation::new(
                        Axiom::FamilyClosure,
                        Witness::pair(h, h, k),
                        format!("{h} ∩ {k} = {i} is not in the family"),
                    ));
                }
            }
        }
        for &h in &fam {
            for &u in self.opens(h) {
                if !self.in_family(u) || !g.is_subgroup_of(u, h) {
                    return Some(Violation::new(
                        Axiom::OpensInFamily,
                        Witness::single(h, u),
                        format!(
                            "{u} is listed in 𝔒({h}) but is not a family member contained in {h}"
                        ),
                    ));
                }
            }
        }
        for &h in &fam {
            for &u in self.opens(h) {
                if !g.order().is_multiple_of(g.subgroup(u).order()) {
                    return Some(Violation::new(
                        Axiom::I,
                        Witness::single(h, u),
                        format!("[{h}:{u}] is not finite"),
                    ));
                }
            }
        }
        for &h in &fam {
            for &u in self.opens(h) {
                if let Some(&v) = self.opens(u).iter().find(|&&v| !self.is_open_in(v, h)) {
                    return Some(Violation::new(
                        Axiom::II,
                        Witness::pair(h, u, v),
                        format!("{v} ∈ 𝔒({u}) and {u} ∈ 𝔒({h}) but {v} ∉ 𝔒({h})"),
                    ));
                }
            }
        }
        for &h in &fam {
            for x in 0..g.order() {
                let hx = g.conjugate(h, x);
                for &u in self.opens(h) {
                    let ux = g.conjugate(u, x);
                    if !self.is_open_in(ux, hx) {
                        return Some(Violation::new(
                            Axiom::III,
                            Witness::conj(h, Some(u), x),
                            format!("{u} ∈ 𝔒({h}) but {ux} = {u}^g ∉ 𝔒({hx}) where {hx} = {h}^g"),
                        ));
                    }
                }
                if self.opens(hx).len() != self.opens(h).len() {
                    let u = self
                        .opens(hx)
                        .iter()
                        .copied()
                        .find(|&u| !self.is_open_in(g.conjugate(u, g.inv(x)), h))
                        .unwrap_or(hx);
                    return Some(Violation::new(
                        Axiom::III,
                        Witness::conj(hx, Some(u), g.inv(x)),
                        format!("𝔒({hx}) is larger than the conjugate of 𝔒({h})"),
                    ));
                }
            }
        }
        for &h in &fam {
            for &u in self.opens(h) {
                for &v in self.opens(h) {
                    let i = g.intersection(u, v);
                    if !self.is_open_in(i, v) {
                        return Some(Violation::new(
                            Axiom::IV,
                            Witness::pair(h, u, v),
                            format!("{u}, {v} ∈ 𝔒({h}) but {u} ∩ {v} = {i} ∉ 𝔒({v})"),
                        ));
                    }
                }
            }
        }
        for &h in &fam {
            if !self.is_open_in(h, h) {
                return Some(Violation::new(
                    Axiom::V,
                    Witness::single(h, h),
                    format!("{h} ∉ 𝔒({h})"),
                ));
            }
        }
        None
    }

    /// Whether `G_x ∈ 𝔒(G_{f(x)})` for every source point `x`. One point per orbit is tested.
    pub fn is_system_morphism(&self, f: &GMap) -> Result<bool> {
        for orbit in f.source.orbits() {
            let x = orbit.representative;
            let sx = orbit.stabilizer;
            let sy = f.target.stabilizer(f.apply(x))?;
            for s in [sx, sy] {
                if !self.in_family(s) {
                    return Err(Error::StabilizerNotInFamily(s.0));
                }
            }
            if !self.is_open_in(sx, sy) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn from_spec(group: Arc<FiniteGroup>, spec: &SystemSpec) -> Result<Self> {
        let family: Vec<SubgroupId> = match &spec.family {
            FamilySpec::Keyword(k) if k == "all" => {
                group.subgroups().iter().map(|s| s.id).collect()
            }
            FamilySpec::Keyword(k) => return Err(invalid(format!("unknown family keyword {k:?}"))),
            FamilySpec::Ids(ids) => ids.clone(),
        };
        match &spec.opens {
            OpensSpec::Keyword(k) if k == "full" => Self::with_family(group, &family),
            OpensSpec::Keyword(k) => Err(invalid(format!("unknown opens keyword {k:?}"))),
            OpensSpec::Map(m) => {
                let parsed = m
                    .iter()
                    .map(|(k, v)| {
                        k.trim()
                            .parse()
                            .map(|id| (SubgroupId(id), v.clone()))
                            .map_err(|_| invalid(format!("bad subgroup id {k:?} in opens")))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?;
                Self::from_assignment(group, &family, &parsed)
            }
        }
    }

    pub fn to_spec(&self) -> SystemSpec {
        let all = self.family.iter().all(|&b| b);
        let family = if all {
            FamilySpec::Keyword("all".into())
        } else {
            FamilySpec::Ids(self.family_ids())
        };
        let opens = match self.form {
            OpensForm::Full => OpensSpec::Keyword("full".into()),
            OpensForm::Explicit => OpensSpec::Map(
                self.family_ids()
                    .into_iter()
                    .map(|h| (h.to_string(), self.opens[h.0].clone()))
                    .collect(),
            ),
            OpensForm::Compressed => OpensSpec::Map(
                self.family_reps()
                    .into_iter()
                    .map(|h| (h.to_string(), self.opens[h.0].clone()))
                    .collect(),
            ),
        };
        SystemSpec { family, opens }
    }
}

fn family_mask(group: &FiniteGroup, family: &[SubgroupId]) -> Result<Vec<bool>> {
    let mut mask = vec![false; group.num_subgroups()];
    for &h in family {
        group.check_id(h)?;
        mask[h.0] = true;
    }
    Ok(mask)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    Keyword(String),
    Ids(Vec<SubgroupId>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpensSpec {
    Keyword(String),
    /// Keys are subgroup ids written as strings, as JSON requires.
    Map(BTreeMap<String, Vec<SubgroupId>>),
}

/// JSON form: `{"family": "all" | [ids], "opens": "full" | {id: [ids]}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub family: FamilySpec,
    pub opens: OpensSpec,
}

impl SystemSpec {
    pub fn full() -> Self {
        SystemSpec {
            family: FamilySpec::Keyword("all".into()),
            opens: OpensSpec::Keyword("full".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    #[serde(rename = "family")]
    FamilyClosure,
    #[serde(rename = "opens-in-family")]
    OpensInFamily,
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
    #[serde(rename = "iii")]
    III,
    #[serde(rename = "iv")]
    IV,
    #[serde(rename = "v")]
    V,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::FamilyClosure => "family closure",
            Axiom::OpensInFamily => "opens inside the family",
            Axiom::I => "axiom (i)",
            Axiom::II => "axiom (ii)",
            Axiom::III => "axiom (iii)",
            Axiom::IV => "axiom (iv)",
            Axiom::V => "axiom (v)",
        };
        f.write_str(s)
    }
}

/// Subgroups (and possibly a conjugating element) exhibiting a violation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub h: SubgroupId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub u: Option<SubgroupId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v: Option<SubgroupId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g: Option<Elem>,
}

impl Witness {
    fn single(h: SubgroupId, u: SubgroupId) -> Self {
        Witness {
            h,
            u: Some(u),
            v: None,
            g: None,
        }
    }

    fn pair(h: SubgroupId, u: SubgroupId, v: SubgroupId) -> Self {
        Witness {
            h,
            u: Some(u),
            v: Some(v),
            g: None,
        }
    }

    fn conj(h: SubgroupId, u: Option<SubgroupId>, g: Elem) -> Self {
        Witness {
            h,
            u,
            v: None,
            g: Some(g),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Witness,
    pub message: String,
}

impl Violation {
    fn new(axiom: Axiom, witness: Witness, message: String) -> Self {
        Violation {
            axiom,
            witness,
            message,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violation: Option<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}
