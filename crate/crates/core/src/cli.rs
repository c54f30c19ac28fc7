//! The `mackeylab` command line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bredon::OrbitCategory;
use crate::catmod::{
    ext_with, pd_bounds, resolve_with, CatModule, CoverHeuristic, ModuleSpec, SkeletonCategory,
};
use crate::config::Limits;
use crate::error::{invalid, invariant, Error, Result};
use crate::group::{named, FiniteGroup, GroupSpec, SubgroupId};
use crate::gset::GSet;
use crate::linalg::{AbelianGroup, Int};
use crate::span::{oracle, BasicSpan, MackeyCategory, MackeyHom, MackeySkeleton, Obj};
use crate::system::{MackeySystem, SystemSpec, Violation};
use crate::tower::{
    ClosedThread, ColimReport, EvaluationReport, ThreadSpec, Tower, TowerMackey, TowerSpec,
};
use crate::transfer::{AdjunctionReport, Transfer};

#[derive(Parser, Debug)]
#[command(
    name = "mackeylab",
    version,
    about = "Mackey functors, Burnside functors and Bredon modules for finite groups"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Group: a JSON file or one of c<n>, s3, s4, d4, q8, a4.
    #[arg(long, global = true)]
    pub group: Option<String>,
    /// Mackey system: a JSON file or `full`.
    #[arg(long, global = true, default_value = "full")]
    pub system: String,
    /// Largest degree, resolution length or tower level, depending on the command.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Ceiling on the total rank of modules built by resolutions and induction.
    #[arg(long, global = true)]
    pub max_rank: Option<usize>,
    /// Print JSON instead of a table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Re-run the brute-force check where one exists.
    #[arg(long, global = true)]
    pub verify: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Check the axioms of a Mackey system.
    Validate,
    /// List the subgroups.
    Lattice,
    /// Table of marks.
    Marks,
    /// Basis of a span hom group.
    Hom {
        #[arg(long = "from")]
        source: String,
        #[arg(long = "to")]
        target: String,
    },
    /// Compose two basic spans, `second ∘ first`.
    Compose {
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// Burnside functor values.
    Burnside,
    /// Free resolution of a module.
    Resolve {
        #[arg(long, value_enum, default_value_t = Category::Mackey)]
        category: Category,
        #[arg(long)]
        module: Option<String>,
    },
    /// `Ext^k(M, N)` for `k ≤ depth`.
    Ext {
        #[arg(long, value_enum, default_value_t = Category::Mackey)]
        category: Category,
        #[arg(long)]
        module: Option<String>,
        #[arg(long)]
        target: Option<String>,
    },
    /// Bredon cohomology `Ext^k(Z(-), N)` over the orbit category.
    BredonExt {
        #[arg(long)]
        target: Option<String>,
    },
    /// Induce an orbit-category module to a Mackey module.
    Ind {
        #[arg(long)]
        module: Option<String>,
    },
    /// Restrict a Mackey module to the orbit category.
    Res {
        #[arg(long)]
        module: Option<String>,
    },
    /// Compare `Hom(ind T, M)` with `Hom(T, res M)`.
    Adjoint {
        #[arg(long)]
        module: Option<String>,
        #[arg(long)]
        target: Option<String>,
    },
    /// Burnside values along a thread of a tower.
    TowerColim {
        #[arg(long, default_value = "two-adic")]
        tower: String,
        #[arg(long, default_value = "trivial")]
        thread: String,
    },
    /// Evaluate resolutions of `B` along a thread of a tower.
    TowerEval {
        #[arg(long, default_value = "two-adic")]
        tower: String,
        #[arg(long, default_value = "trivial")]
        thread: String,
        #[arg(long, default_value_t = 2)]
        steps: usize,
    },
    /// `Ext(B, M)` over the Mackey category next to `Ext(Z, res M)` over the orbit category.
    CompareDims {
        #[arg(long)]
        target: Option<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Mackey,
    Orbit,
}

/// Loaded inputs, keyed by the reference used on the command line.
#[derive(Debug)]
pub struct Workspace {
    pub limits: Limits,
    groups: BTreeMap<String, Arc<FiniteGroup>>,
    systems: BTreeMap<String, Arc<MackeySystem>>,
    towers: BTreeMap<String, Arc<Tower>>,
}

impl Workspace {
    pub fn new(limits: Limits) -> Self {
        Workspace {
            limits,
            groups: BTreeMap::new(),
            systems: BTreeMap::new(),
            towers: BTreeMap::new(),
        }
    }

    pub fn group(&mut self, reference: &str) -> Result<Arc<FiniteGroup>> {
        if let Some(g) = self.groups.get(reference) {
            return Ok(g.clone());
        }
        let g = Arc::new(match builtin_group(reference) {
            Some(g) => g,
            None => {
                let spec: GroupSpec = read_json(reference)?;
                FiniteGroup::from_spec(&spec, &self.limits)?
            }
        });
        if g.num_subgroups() > self.limits.max_lattice {
            return Err(Error::BoundExceeded {
                what: "subgroup lattice",
                value: g.num_subgroups(),
                limit: self.limits.max_lattice,
            });
        }
        self.groups.insert(reference.to_string(), g.clone());
        Ok(g)
    }

    pub fn system(&mut self, group_ref: &str, reference: &str) -> Result<Arc<MackeySystem>> {
        let key = format!("{group_ref}::{reference}");
        if let Some(s) = self.systems.get(&key) {
            return Ok(s.clone());
        }
        let g = self.group(group_ref)?;
        let spec = if reference == "full" {
            SystemSpec::full()
        } else {
            read_json(reference)?
        };
        let sys = Arc::new(MackeySystem::from_spec(g, &spec)?);
        self.systems.insert(key, sys.clone());
        Ok(sys)
    }

    pub fn tower(&mut self, reference: &str, depth: usize) -> Result<Arc<Tower>> {
        let key = format!("{reference}@{depth}");
        if let Some(t) = self.towers.get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(if reference == "two-adic" {
            Tower::two_adic(depth, &self.limits)?
        } else {
            let spec: TowerSpec = read_json(reference)?;
            Tower::from_spec(&spec, &self.limits)?
        });
        self.towers.insert(key, t.clone());
        Ok(t)
    }
}

fn builtin_group(name: &str) -> Option<FiniteGroup> {
    match name.to_ascii_lowercase().as_str() {
        "trivial" => Some(named::trivial()),
        "s3" => Some(named::symmetric3()),
        "s4" => Some(named::symmetric4()),
        "d4" | "d8" => Some(named::dihedral8()),
        "q8" => Some(named::quaternion8()),
        "a4" => Some(named::alternating4()),
        s => s
            .strip_prefix('c')
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| (1..=64).contains(&n))
            .map(named::cyclic),
    }
}

fn read_json<T: DeserializeOwned>(path: &str) -> Result<T> {
    let text = std::fs::read_to_string(Path::new(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// A command's result: printable as a table or as JSON.
pub trait Report: Serialize + DeserializeOwned + PartialEq {
    fn human(&self) -> String;
}

/// Rendered output and exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

fn emit<R: Report>(r: &R, json: bool) -> Result<String> {
    if json {
        let mut s = serde_json::to_string_pretty(r)?;
        s.push('\n');
        Ok(s)
    } else {
        Ok(r.human())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub group: String,
    pub passed: bool,
    pub violation: Option<Violation>,
}

impl Report for ValidateReport {
    fn human(&self) -> String {
        match &self.violation {
            None => format!("{}: Mackey system is valid\n", self.group),
            Some(v) => {
                let w = &v.witness;
                let mut s = format!(
                    "{}: {} fails: {}\n  witness H = {}",
                    self.group, v.axiom, v.message, w.h
                );
                if let Some(u) = w.u {
                    let _ = write!(s, ", U = {u}");
                }
                if let Some(x) = w.v {
                    let _ = write!(s, ", V = {x}");
                }
                if let Some(g) = w.g {
                    let _ = write!(s, ", g = {g}");
                }
                s.push('\n');
                s
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupRow {
    pub id: SubgroupId,
    pub order: usize,
    pub class: usize,
    pub class_rep: bool,
    pub normalizer: SubgroupId,
    pub elements: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub group: String,
    pub order: usize,
    pub classes: usize,
    pub subgroups: Vec<SubgroupRow>,
}

impl Report for LatticeReport {
    fn human(&self) -> String {
        let mut s = format!(
            "{} (order {}): {} subgroups in {} classes\n",
            self.group,
            self.order,
            self.subgroups.len(),
            self.classes
        );
        let _ = writeln!(
            s,
            "{:>4} {:>6} {:>6} {:>4} {:>10}",
            "id", "order", "class", "rep", "normalizer"
        );
        for r in &self.subgroups {
            let _ = writeln!(
                s,
                "{:>4} {:>6} {:>6} {:>4} {:>10}",
                r.id.0,
                r.order,
                r.class,
                if r.class_rep { "*" } else { "" },
                r.normalizer.0
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarksReport {
    pub group: String,
    pub classes: Vec<SubgroupId>,
    /// `table[i][j] = |(G/H_j)^{H_i}|`.
    pub table: Vec<Vec<usize>>,
}

impl Report for MarksReport {
    fn human(&self) -> String {
        let mut s = format!("table of marks of {}\n", self.group);
        let _ = write!(s, "{:>6}", "");
        for c in &self.classes {
            let _ = write!(s, "{:>6}", format!("G/{}", c.0));
        }
        s.push('\n');
        for (i, row) in self.table.iter().enumerate() {
            let _ = write!(s, "{:>6}", self.classes[i].0);
            for v in row {
                let _ = write!(s, "{v:>6}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomReport {
    pub source: String,
    pub target: String,
    pub rank: usize,
    pub spans: Vec<String>,
}

impl Report for HomReport {
    fn human(&self) -> String {
        let mut s = format!(
            "[{}, {}] is free of rank {}\n",
            self.source, self.target, self.rank
        );
        for (i, sp) in self.spans.iter().enumerate() {
            let _ = writeln!(s, "{i:>4}  {sp}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: Int,
    pub span: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposeReport {
    pub first: String,
    pub second: String,
    pub terms: Vec<Term>,
}

impl Report for ComposeReport {
    fn human(&self) -> String {
        let mut s = format!("{}\n  ∘ {}\n  =", self.second, self.first);
        if self.terms.is_empty() {
            s.push_str(" 0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let sep = if i == 0 { " " } else { "\n  + " };
            let _ = write!(s, "{sep}{} {}", t.coefficient, t.span);
        }
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurnsideRow {
    pub object: String,
    pub rank: usize,
    /// Subgroup `L^a ≤ H` labelling each basis element.
    pub labels: Vec<SubgroupId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurnsideReport {
    pub group: String,
    pub rows: Vec<BurnsideRow>,
}

impl Report for BurnsideReport {
    fn human(&self) -> String {
        let mut s = format!("Burnside functor of {}\n", self.group);
        for r in &self.rows {
            let labels: Vec<String> = r.labels.iter().map(|l| l.0.to_string()).collect();
            let _ = writeln!(
                s,
                "{:>6}  rank {:>3}  [{}]",
                r.object,
                r.rank,
                labels.join(" ")
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRow {
    pub degree: usize,
    pub rank: usize,
    pub generators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolveReport {
    pub category: String,
    pub module: String,
    pub values: Vec<AbelianGroup>,
    pub steps: Vec<StepRow>,
    pub terminated: Option<usize>,
}

impl Report for ResolveReport {
    fn human(&self) -> String {
        let vals: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        let mut s = format!(
            "resolution of {} over {}\n  values: {}\n",
            self.module,
            self.category,
            vals.join(", ")
        );
        for st in &self.steps {
            let _ = writeln!(
                s,
                "  P_{}: rank {:>3}  {}",
                st.degree,
                st.rank,
                st.generators.join(" ")
            );
        }
        match self.terminated {
            Some(t) => {
                let _ = writeln!(s, "  terminates at P_{t}");
            }
            None => s.push_str("  does not terminate within the requested depth\n"),
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtRow {
    pub degree: usize,
    pub group: AbelianGroup,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtReport {
    pub category: String,
    pub module: String,
    pub target: String,
    pub rows: Vec<ExtRow>,
}

impl Report for ExtReport {
    fn human(&self) -> String {
        let mut s = format!(
            "Ext over {} of ({}, {})\n",
            self.category, self.module, self.target
        );
        for r in &self.rows {
            let _ = writeln!(s, "  Ext^{} = {}", r.degree, r.group);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleReport {
    pub module: String,
    pub objects: Vec<String>,
    pub values: Vec<AbelianGroup>,
    pub spec: ModuleSpec,
}

impl Report for ModuleReport {
    fn human(&self) -> String {
        let mut s = format!("{} over {}\n", self.module, self.spec.category);
        for (label, v) in self.objects.iter().zip(&self.values) {
            let _ = writeln!(s, "  {label:>6}: {v}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjointReport {
    pub module: String,
    pub target: String,
    pub report: AdjunctionReport,
    pub holds: bool,
}

impl Report for AdjointReport {
    fn human(&self) -> String {
        format!(
            "Hom(ind {t}, {m}) = {}\nHom({t}, res {m}) = {}\nunit/counit round trip: {}\n",
            self.report.induced_side,
            self.report.restricted_side,
            if self.report.round_trip {
                "identity"
            } else {
                "FAILED"
            },
            t = self.module,
            m = self.target,
        )
    }
}

impl Report for ColimReport {
    fn human(&self) -> String {
        let mut s = String::new();
        for seg in &self.segments {
            let _ = writeln!(
                s,
                "level {} ({}): rank of B(G/G) = {}",
                seg.level, seg.group, self.ranks[seg.level]
            );
            for nb in &seg.neighborhoods {
                let _ = writeln!(
                    s,
                    "    U = {:>3} (order {:>3}): rank {}",
                    nb.subgroup.0, nb.order, nb.rank
                );
            }
        }
        for (n, iso) in self.level_map_isos.iter().enumerate() {
            let _ = writeln!(
                s,
                "  level {n} -> {}: {}",
                n + 1,
                if *iso {
                    "isomorphism"
                } else {
                    "not an isomorphism"
                }
            );
        }
        match self.stabilized_at {
            Some(n) => {
                let _ = writeln!(s, "stabilized from level {n}");
            }
            None => s.push_str("not stabilized within the segment\n"),
        }
        s
    }
}

impl Report for EvaluationReport {
    fn human(&self) -> String {
        let mut s = String::new();
        for l in &self.levels {
            let ranks: Vec<String> = l.ranks_at_thread.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(
                s,
                "level {}: {} steps, ranks at the thread {}, exact: {}, commutes: {}",
                l.level,
                l.steps,
                ranks.join(" -> "),
                l.exact,
                l.commutes
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareRow {
    pub degree: usize,
    pub mackey: AbelianGroup,
    pub bredon: AbelianGroup,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareReport {
    pub target: String,
    pub rows: Vec<CompareRow>,
    pub mackey_pd: crate::catmod::PdBounds,
    pub bredon_pd: crate::catmod::PdBounds,
}

impl Report for CompareReport {
    fn human(&self) -> String {
        let mut s = format!(
            "Ext(B, {t}) over the Mackey category vs Ext(Z, res {t}) over the orbit category\n",
            t = self.target
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "  degree {}: {} | {}{}",
                r.degree,
                r.mackey,
                r.bredon,
                if r.equal { "" } else { "  MISMATCH" }
            );
        }
        let _ = writeln!(s, "  Burnside functor: {}", self.mackey_pd);
        let _ = writeln!(s, "  constant functor: {}", self.bredon_pd);
        s
    }
}

/// Parses arguments and runs; errors become exit codes with a message.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return Output {
                text: e.to_string(),
                code,
            };
        }
    };
    let mut limits = Limits::from_env();
    if let Some(r) = cli.global.max_rank {
        limits.max_rank = r;
    }
    let mut ws = Workspace::new(limits);
    match execute(&cli, &mut ws) {
        Ok(out) => out,
        Err(e) => Output {
            text: format!("error: {e}\n"),
            code: e.exit_code(),
        },
    }
}

fn need_group(g: &GlobalArgs) -> Result<&str> {
    g.group
        .as_deref()
        .ok_or_else(|| invalid("this command needs --group"))
}

/// Mackey category, skeleton and module context for one group and system.
struct Context {
    system: Arc<MackeySystem>,
    mackey: Arc<MackeySkeleton>,
    orbit: Option<Arc<OrbitCategory>>,
}

impl Context {
    fn load(ws: &mut Workspace, g: &GlobalArgs) -> Result<Self> {
        let group = need_group(g)?.to_string();
        let system = ws.system(&group, &g.system)?;
        let mackey = Arc::new(MackeySkeleton::new(Arc::new(MackeyCategory::new(
            system.clone(),
        )))?);
        Ok(Context {
            system,
            mackey,
            orbit: None,
        })
    }

    fn orbit(&mut self) -> Result<Arc<OrbitCategory>> {
        if self.orbit.is_none() {
            self.orbit = Some(Arc::new(OrbitCategory::new(self.system.clone())?));
        }
        Ok(self.orbit.clone().expect("set above"))
    }

    fn transfer(&mut self, limits: &Limits) -> Result<Transfer> {
        let orbit = self.orbit()?;
        Ok(Transfer::from_parts(orbit, self.mackey.clone())?.with_limits(limits.clone()))
    }

    fn skeleton(&mut self, c: Category) -> Result<Arc<SkeletonCategory>> {
        Ok(match c {
            Category::Mackey => self.mackey.skeleton.clone(),
            Category::Orbit => self.orbit()?.skeleton.clone(),
        })
    }

    /// `burnside`, `constant`, `zero`, `free:G/a,G/b`, or a module JSON file.
    fn module(&mut self, c: Category, reference: &str) -> Result<Arc<CatModule>> {
        let cat = self.skeleton(c)?;
        let m = match (reference, c) {
            ("burnside", Category::Mackey) => self.mackey.burnside()?,
            ("constant", _) => CatModule::constant(cat),
            ("zero", _) => CatModule::zero(cat),
            (r, _) if r.starts_with("free:") => {
                let objs = r["free:".len()..]
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|o| self.object_index(c, o))
                    .collect::<Result<Vec<_>>>()?;
                (*crate::catmod::FreeModule::new(cat, objs)?.module).clone()
            }
            ("burnside", Category::Orbit) => {
                return Err(invalid("the Burnside functor lives on the Mackey category"))
            }
            (path, _) => {
                let spec: ModuleSpec = read_json(path)?;
                if spec.category != cat.name() {
                    return Err(Error::ObjectMismatch(format!(
                        "module is over {:?}, expected {:?}",
                        spec.category,
                        cat.name()
                    )));
                }
                let m = CatModule::from_spec(cat, &spec)?;
                m.validate()?;
                m
            }
        };
        Ok(Arc::new(m))
    }

    fn object_index(&mut self, c: Category, label: &str) -> Result<usize> {
        let obj = parse_obj(self.system.group(), label)?;
        let Obj::Orbit(h) = obj else {
            return Err(invalid(
                "the terminal object is not an object of the skeleton",
            ));
        };
        match c {
            Category::Mackey => self.mackey.object_of(h),
            Category::Orbit => self.orbit()?.object_of(h),
        }
    }
}

fn default_module(c: Category) -> &'static str {
    match c {
        Category::Mackey => "burnside",
        Category::Orbit => "constant",
    }
}

fn category_name(c: Category) -> String {
    match c {
        Category::Mackey => "mackey".into(),
        Category::Orbit => "orbit".into(),
    }
}

fn execute(cli: &Cli, ws: &mut Workspace) -> Result<Output> {
    let g = &cli.global;
    let json = g.json;
    let ok = |text: String| Ok(Output { text, code: 0 });
    match &cli.command {
        Command::Validate => {
            let group = need_group(g)?.to_string();
            let sys = ws.system(&group, &g.system)?;
            let report = sys.validate();
            let r = ValidateReport {
                group: sys.group().name().to_string(),
                passed: report.passed(),
                violation: report.violation,
            };
            let code = if r.passed { 0 } else { 2 };
            Ok(Output {
                text: emit(&r, json)?,
                code,
            })
        }
        Command::Lattice => {
            let grp = ws.group(need_group(g)?)?;
            if g.verify {
                verify_lattice(&grp)?;
            }
            let r = LatticeReport {
                group: grp.name().to_string(),
                order: grp.order(),
                classes: grp.num_classes(),
                subgroups: grp
                    .subgroups()
                    .iter()
                    .map(|s| SubgroupRow {
                        id: s.id,
                        order: s.order(),
                        class: s.class,
                        class_rep: grp.class_rep(s.class) == s.id,
                        normalizer: s.normalizer,
                        elements: s.elements.clone(),
                    })
                    .collect(),
            };
            ok(emit(&r, json)?)
        }
        Command::Marks => {
            let grp = ws.group(need_group(g)?)?;
            let table = grp.table_of_marks();
            if g.verify {
                verify_marks(&grp, &table)?;
            }
            let r = MarksReport {
                group: grp.name().to_string(),
                classes: grp.class_reps(),
                table,
            };
            ok(emit(&r, json)?)
        }
        Command::Hom { source, target } => {
            let ctx = Context::load(ws, g)?;
            let cat = &ctx.mackey.category;
            let Obj::Orbit(h) = parse_obj(cat.group(), source)? else {
                return Err(invalid("the source of a hom must be an orbit G/H"));
            };
            let y = parse_obj(cat.group(), target)?;
            let basis = cat.hom_basis(h, y)?;
            if g.verify {
                let classes = oracle::span_classes(cat, h, y);
                if classes.len() != basis.len() {
                    return Err(invariant(format!(
                        "basis has {} spans but enumeration finds {} classes",
                        basis.len(),
                        classes.len()
                    )));
                }
            }
            let r = HomReport {
                source: Obj::Orbit(h).to_string(),
                target: y.to_string(),
                rank: basis.len(),
                spans: basis.spans.iter().map(|s| s.text()).collect(),
            };
            ok(emit(&r, json)?)
        }
        Command::Compose { first, second } => {
            let ctx = Context::load(ws, g)?;
            let cat = &ctx.mackey.category;
            let f = BasicSpan::parse(first)?;
            let s = BasicSpan::parse(second)?;
            let fh = cat.span_hom(f.source, f.target, f.middle, f.left, f.right)?;
            let sh = cat.span_hom(s.source, s.target, s.middle, s.left, s.right)?;
            let out = cat.compose(&sh, &fh)?;
            if g.verify {
                let fb = cat.hom_basis(f.source, f.target)?.spans
                    [*fh.coeffs.keys().next().expect("basis span")];
                let sb = cat.hom_basis(s.source, s.target)?.spans
                    [*sh.coeffs.keys().next().expect("basis span")];
                if oracle::compose_by_pullback(cat, &fb, &sb) != out {
                    return Err(invariant(
                        "composite disagrees with the set-theoretic pullback",
                    ));
                }
            }
            let basis = cat.hom_basis(out.source, out.target)?;
            let r = ComposeReport {
                first: f.text(),
                second: s.text(),
                terms: hom_terms(&out, &basis.spans),
            };
            ok(emit(&r, json)?)
        }
        Command::Burnside => {
            let ctx = Context::load(ws, g)?;
            let cat = &ctx.mackey.category;
            let mut rows = Vec::new();
            for &h in &ctx.mackey.objects {
                let v = cat.burnside_eval(h)?;
                if g.verify {
                    let brute = burnside_rank_oracle(&ctx.system, h);
                    if brute != v.rank() {
                        return Err(invariant(format!(
                            "B(G/{}) has rank {} but {} classes",
                            h.0,
                            v.rank(),
                            brute
                        )));
                    }
                }
                rows.push(BurnsideRow {
                    object: Obj::Orbit(h).to_string(),
                    rank: v.rank(),
                    labels: v.labels,
                });
            }
            if ctx.system.contains_g() {
                let v = cat.burnside_eval(ctx.system.group().whole())?;
                rows.push(BurnsideRow {
                    object: "•".into(),
                    rank: v.rank(),
                    labels: v.labels,
                });
            }
            let r = BurnsideReport {
                group: ctx.system.group().name().to_string(),
                rows,
            };
            ok(emit(&r, json)?)
        }
        Command::Resolve { category, module } => {
            let mut ctx = Context::load(ws, g)?;
            let name = module
                .clone()
                .unwrap_or_else(|| default_module(*category).into());
            let m = ctx.module(*category, &name)?;
            let depth = g.depth.unwrap_or(3);
            let res = resolve_with(m.clone(), depth, &ws.limits, CoverHeuristic::Greedy)?;
            if g.verify {
                res.verify()?;
            }
            let cat = m.category();
            let r = ResolveReport {
                category: category_name(*category),
                module: name,
                values: m.values(),
                steps: res
                    .frees
                    .iter()
                    .enumerate()
                    .map(|(k, f)| StepRow {
                        degree: k,
                        rank: f.rank(),
                        generators: f
                            .generators
                            .iter()
                            .map(|&y| cat.object_label(y).to_string())
                            .collect(),
                    })
                    .collect(),
                terminated: res.terminated,
            };
            ok(emit(&r, json)?)
        }
        Command::Ext {
            category,
            module,
            target,
        } => {
            let mut ctx = Context::load(ws, g)?;
            let mname = module
                .clone()
                .unwrap_or_else(|| default_module(*category).into());
            let tname = target.clone().unwrap_or_else(|| mname.clone());
            let m = ctx.module(*category, &mname)?;
            let n = ctx.module(*category, &tname)?;
            let rows = ext_rows(&m, &n, g.depth.unwrap_or(2), &ws.limits, g.verify)?;
            let r = ExtReport {
                category: category_name(*category),
                module: mname,
                target: tname,
                rows,
            };
            ok(emit(&r, json)?)
        }
        Command::BredonExt { target } => {
            let mut ctx = Context::load(ws, g)?;
            let tname = target.clone().unwrap_or_else(|| "constant".into());
            let z = ctx.module(Category::Orbit, "constant")?;
            let n = ctx.module(Category::Orbit, &tname)?;
            let rows = ext_rows(&z, &n, g.depth.unwrap_or(2), &ws.limits, g.verify)?;
            let r = ExtReport {
                category: category_name(Category::Orbit),
                module: "constant".into(),
                target: tname,
                rows,
            };
            ok(emit(&r, json)?)
        }
        Command::Ind { module } => {
            let mut ctx = Context::load(ws, g)?;
            let name = module.clone().unwrap_or_else(|| "constant".into());
            let t = ctx.module(Category::Orbit, &name)?;
            let tr = ctx.transfer(&ws.limits)?;
            let ind = tr.induce(&t)?;
            if g.verify {
                tr.check_functoriality()?;
                ind.module.validate()?;
            }
            let r = ModuleReport {
                module: format!("ind {name}"),
                objects: object_labels(ind.module.category()),
                values: ind.module.values(),
                spec: ind.module.to_spec(),
            };
            ok(emit(&r, json)?)
        }
        Command::Res { module } => {
            let mut ctx = Context::load(ws, g)?;
            let name = module.clone().unwrap_or_else(|| "burnside".into());
            let m = ctx.module(Category::Mackey, &name)?;
            let tr = ctx.transfer(&ws.limits)?;
            let res = tr.restrict(&m)?;
            if g.verify {
                tr.check_functoriality()?;
                res.validate()?;
            }
            let r = ModuleReport {
                module: format!("res {name}"),
                objects: object_labels(res.category()),
                values: res.values(),
                spec: res.to_spec(),
            };
            ok(emit(&r, json)?)
        }
        Command::Adjoint { module, target } => {
            let mut ctx = Context::load(ws, g)?;
            let tname = module.clone().unwrap_or_else(|| "constant".into());
            let mname = target.clone().unwrap_or_else(|| "burnside".into());
            let t = ctx.module(Category::Orbit, &tname)?;
            let m = ctx.module(Category::Mackey, &mname)?;
            let tr = ctx.transfer(&ws.limits)?;
            let report = tr.adjunction_check(&t, &m)?;
            let holds = report.holds();
            let r = AdjointReport {
                module: tname,
                target: mname,
                report,
                holds,
            };
            Ok(Output {
                text: emit(&r, json)?,
                code: if holds { 0 } else { 1 },
            })
        }
        Command::TowerColim { tower, thread } => {
            let depth = g.depth.unwrap_or(4);
            let t = ws.tower(tower, depth)?;
            let th = load_thread(&t, thread)?;
            let tm = TowerMackey::new(t);
            let r = tm.colim_burnside(&th, depth)?;
            if g.verify {
                verify_segments(&tm, &r)?;
            }
            ok(emit(&r, json)?)
        }
        Command::TowerEval {
            tower,
            thread,
            steps,
        } => {
            let depth = g.depth.unwrap_or(2);
            let t = ws.tower(tower, depth)?;
            let th = load_thread(&t, thread)?;
            let tm = TowerMackey::new(t);
            let res = tm.resolve_burnside(depth, *steps, &ws.limits)?;
            if g.verify {
                for r in &res {
                    r.verify()?;
                }
            }
            let r = tm.evaluate_resolution_at_thread(&res, &th, depth)?;
            let code = if r.all_exact() { 0 } else { 1 };
            Ok(Output {
                text: emit(&r, json)?,
                code,
            })
        }
        Command::CompareDims { target } => {
            let mut ctx = Context::load(ws, g)?;
            let depth = g.depth.unwrap_or(2);
            let mname = target.clone().unwrap_or_else(|| "burnside".into());
            let m = ctx.module(Category::Mackey, &mname)?;
            let b = ctx.module(Category::Mackey, "burnside")?;
            let z = ctx.module(Category::Orbit, "constant")?;
            let tr = ctx.transfer(&ws.limits)?;
            let res_m = tr.restrict(&m)?;
            let lhs = ext_rows(&b, &m, depth, &ws.limits, g.verify)?;
            let rhs = ext_rows(&z, &res_m, depth, &ws.limits, g.verify)?;
            let rows = lhs
                .into_iter()
                .zip(rhs)
                .map(|(a, c)| CompareRow {
                    degree: a.degree,
                    equal: a.group == c.group,
                    mackey: a.group,
                    bredon: c.group,
                })
                .collect();
            let r = CompareReport {
                target: mname,
                rows,
                mackey_pd: pd_bounds(b, depth, &ws.limits)?,
                bredon_pd: pd_bounds(z, depth, &ws.limits)?,
            };
            ok(emit(&r, json)?)
        }
    }
}

/// `G/G`, `G/1`, `G/#<id>`, `G/<id>` or the terminal object.
fn parse_obj(g: &FiniteGroup, s: &str) -> Result<Obj> {
    let obj = match s.trim() {
        "G/G" => Obj::Orbit(g.whole()),
        "G/1" | "G/e" => Obj::Orbit(g.trivial_subgroup()),
        t => match t.strip_prefix("G/#") {
            Some(id) => Obj::Orbit(SubgroupId(
                id.parse()
                    .map_err(|_| invalid(format!("cannot parse object {t:?}")))?,
            )),
            None => t.parse()?,
        },
    };
    if let Obj::Orbit(h) = obj {
        g.check_id(h)?;
    }
    Ok(obj)
}

fn object_labels(cat: &SkeletonCategory) -> Vec<String> {
    (0..cat.num_objects())
        .map(|x| cat.object_label(x).to_string())
        .collect()
}

fn hom_terms(h: &MackeyHom, spans: &[BasicSpan]) -> Vec<Term> {
    h.coeffs
        .iter()
        .map(|(&i, &c)| Term {
            coefficient: c,
            span: spans[i].text(),
        })
        .collect()
}

fn ext_rows(
    m: &Arc<CatModule>,
    n: &CatModule,
    depth: usize,
    limits: &Limits,
    verify: bool,
) -> Result<Vec<ExtRow>> {
    let mut rows = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let e = ext_with(m.clone(), n, k, limits, CoverHeuristic::Greedy)?;
        if verify {
            let other = ext_with(m.clone(), n, k, limits, CoverHeuristic::FirstBasis)?;
            if other.group != e.group {
                return Err(invariant(format!(
                    "Ext^{k} depends on the resolution: {} vs {}",
                    e.group, other.group
                )));
            }
        }
        rows.push(ExtRow {
            degree: k,
            group: e.group,
        });
    }
    Ok(rows)
}

fn load_thread(tower: &Tower, reference: &str) -> Result<ClosedThread> {
    match reference {
        "trivial" => Ok(ClosedThread::trivial(tower)),
        "whole" => Ok(ClosedThread::whole(tower)),
        path => {
            let spec: ThreadSpec = read_json(path)?;
            ClosedThread::from_spec(tower, &spec)
        }
    }
}

/// Number of `H`-conjugacy classes of subgroups `L ≤ H` open in `H`.
fn burnside_rank_oracle(sys: &MackeySystem, h: SubgroupId) -> usize {
    let g = sys.group();
    let hs = &g.subgroup(h).elements;
    let mut seen: Vec<SubgroupId> = Vec::new();
    let mut classes = 0;
    for s in g.subgroups() {
        if !g.is_subgroup_of(s.id, h)
            || !sys.in_family(s.id)
            || !sys.is_open_in(s.id, h)
            || seen.contains(&s.id)
        {
            continue;
        }
        classes += 1;
        for &x in hs {
            let c = g.conjugate(s.id, x);
            if !seen.contains(&c) {
                seen.push(c);
            }
        }
    }
    classes
}

fn verify_lattice(g: &FiniteGroup) -> Result<()> {
    for s in g.subgroups() {
        for &a in &s.elements {
            for &b in &s.elements {
                if !s.contains(g.mul(a, b)) {
                    return Err(invariant(format!("subgroup {} is not closed", s.id)));
                }
            }
        }
        let normalizer: Vec<usize> = (0..g.order())
            .filter(|&x| g.conjugate(s.id, x) == s.id)
            .collect();
        if g.subgroup(s.normalizer).elements != normalizer {
            return Err(invariant(format!("normalizer of {} is wrong", s.id)));
        }
    }
    // every cyclic subgroup must be listed
    for x in 0..g.order() {
        if g.subgroup_with_elements(&g.closure(&[x])).is_none() {
            return Err(invariant(format!(
                "the subgroup generated by element {x} is missing"
            )));
        }
    }
    Ok(())
}

fn verify_marks(g: &Arc<FiniteGroup>, table: &[Vec<usize>]) -> Result<()> {
    let reps = g.class_reps();
    for (j, &k) in reps.iter().enumerate() {
        let x = GSet::homogeneous(g.clone(), k);
        for (i, &h) in reps.iter().enumerate() {
            if x.fixed_points(h).len() != table[i][j] {
                return Err(invariant(format!(
                    "mark of {h} on G/{k} disagrees with a fixed-point count"
                )));
            }
        }
    }
    Ok(())
}

fn verify_segments(tm: &TowerMackey, r: &ColimReport) -> Result<()> {
    for seg in &r.segments {
        let cat = tm.category(seg.level)?;
        let e = cat.group().identity();
        for m in &seg.maps {
            let res = BasicSpan {
                source: m.to,
                target: Obj::Orbit(m.from),
                middle: m.to,
                left: e,
                right: e,
            };
            let from = cat.hom_basis(m.from, Obj::Terminal)?;
            let len = cat.hom_basis(m.to, Obj::Terminal)?.len();
            for (j, s) in from.spans.iter().enumerate() {
                let col: Vec<Int> = m.matrix.iter().map(|row| row[j]).collect();
                if oracle::compose_by_pullback(cat, &res, s).to_dense(len) != col {
                    return Err(invariant(format!(
                        "level {} restriction map disagrees with the pullback",
                        seg.level
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Parses `text` as the JSON form of `R` and checks it re-serializes to an equal value.
pub fn reparse<R: Report>(text: &str) -> Result<R> {
    let r: R = serde_json::from_str(text)?;
    let again: R = serde_json::from_str(&serde_json::to_string(&r)?)?;
    if again != r {
        return Err(invariant("report does not survive a JSON round trip"));
    }
    Ok(r)
}
