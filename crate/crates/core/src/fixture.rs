//! Small CLEVR-style fixture: a complete reasoning theory, the
//! Light/Medium/Heavy initial-theory tiers carved out of it, seeded scene
//! generation, and a direct tree evaluator that computes gold answers
//! without going through ASP at all.
//!
//! Questions are execution trees over the operations
//! `scene, filter_<value>, exist, count, unique, union, and, relate_left,
//! query_<category>, same_<attribute>, equal_integer`, encoded as indexed
//! facts. Scenes are small object lists with shape/color/size/material
//! attributes and a left-to-right ordering.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asp::{parse_program, Program};
use crate::dataset::{translate_functional_to_asp, Example, FunctionalNode};

pub const SHAPES: [&str; 3] = ["cube", "sphere", "cylinder"];
pub const COLORS: [&str; 4] = ["red", "blue", "cyan", "yellow"];
pub const SIZES: [&str; 2] = ["large", "small"];
pub const MATERIALS: [&str; 2] = ["metal", "rubber"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tier {
    Light,
    Medium,
    Heavy,
}

impl Tier {
    pub fn name(&self) -> &'static str {
        match self {
            Tier::Light => "Light",
            Tier::Medium => "Medium",
            Tier::Heavy => "Heavy",
        }
    }

    pub fn parse(name: &str) -> Option<Tier> {
        match name.to_lowercase().as_str() {
            "light" => Some(Tier::Light),
            "medium" => Some(Tier::Medium),
            "heavy" => Some(Tier::Heavy),
            _ => None,
        }
    }
}

/// Every theory rule, tagged with the smallest tier that contains it.
/// Tier `None` means the rule only appears in the full theory.
const THEORY: &[(Option<Tier>, &str)] = &[
    // Light: how to start and finish processing a question, nothing else.
    (Some(Tier::Light), "obj(O) :- has_shape(O,S)."),
    (Some(Tier::Light), "holds(T,O) :- scene(T), obj(O)."),
    (Some(Tier::Light), "ans(V) :- end(T), val_bool(T,V)."),
    (Some(Tier::Light), "ans(V) :- end(T), val_num(T,V)."),
    (Some(Tier::Light), "ans(V) :- end(T), val_attr(T,V)."),
    // Medium adds attribute filters, existence, and unique selection.
    (Some(Tier::Medium), "holds(T,O) :- filter_large(T,I), holds(I,O), has_size(O,large)."),
    (Some(Tier::Medium), "holds(T,O) :- filter_small(T,I), holds(I,O), has_size(O,small)."),
    (Some(Tier::Medium), "holds(T,O) :- filter_red(T,I), holds(I,O), has_color(O,red)."),
    (Some(Tier::Medium), "holds(T,O) :- filter_blue(T,I), holds(I,O), has_color(O,blue)."),
    (Some(Tier::Medium), "holds(T,O) :- filter_cyan(T,I), holds(I,O), has_color(O,cyan)."),
    (Some(Tier::Medium), "holds(T,O) :- filter_yellow(T,I), holds(I,O), has_color(O,yellow)."),
    (Some(Tier::Medium), "holds(T,O) :- filter_cube(T,I), holds(I,O), has_shape(O,cube)."),
    (Some(Tier::Medium), "holds(T,O) :- filter_sphere(T,I), holds(I,O), has_shape(O,sphere)."),
    (Some(Tier::Medium), "holds(T,O) :- filter_cylinder(T,I), holds(I,O), has_shape(O,cylinder)."),
    (Some(Tier::Medium), "holds(T,O) :- filter_metal(T,I), holds(I,O), has_material(O,metal)."),
    (Some(Tier::Medium), "holds(T,O) :- filter_rubber(T,I), holds(I,O), has_material(O,rubber)."),
    (Some(Tier::Medium), "val_bool(T,yes) :- exist(T,I), holds(I,O)."),
    (Some(Tier::Medium), "val_bool(T,no) :- exist(T,I), not val_bool(T,yes)."),
    (Some(Tier::Medium), "holds(T,O) :- unique(T,I), holds(I,O)."),
    // Heavy adds set combination, counting, and attribute queries.
    (Some(Tier::Heavy), "holds(T,O) :- union(T,A,B), holds(A,O)."),
    (Some(Tier::Heavy), "holds(T,O) :- union(T,A,B), holds(B,O)."),
    (Some(Tier::Heavy), "holds(T,O) :- and(T,A,B), holds(A,O), holds(B,O)."),
    (Some(Tier::Heavy), "cnt(T,0,0) :- count(T,I)."),
    (
        Some(Tier::Heavy),
        "cnt(T,K1,C1) :- count(T,I), cnt(T,K,C), holds(I,K), obj(K), succ(K,K1), succ(C,C1).",
    ),
    (
        Some(Tier::Heavy),
        "cnt(T,K1,C) :- count(T,I), cnt(T,K,C), not holds(I,K), obj(K), succ(K,K1).",
    ),
    (Some(Tier::Heavy), "val_num(T,C) :- count(T,I), cnt(T,N,C), num_objects(N)."),
    (Some(Tier::Heavy), "val_attr(T,V) :- query_color(T,I), holds(I,O), has_color(O,V)."),
    (Some(Tier::Heavy), "val_attr(T,V) :- query_shape(T,I), holds(I,O), has_shape(O,V)."),
    (Some(Tier::Heavy), "val_attr(T,V) :- query_size(T,I), holds(I,O), has_size(O,V)."),
    (Some(Tier::Heavy), "val_attr(T,V) :- query_material(T,I), holds(I,O), has_material(O,V)."),
    // Only the full theory has spatial relations, same-attribute ops, and
    // integer comparison.
    (None, "holds(T,O) :- relate_left(T,I), holds(I,O2), left_of(O,O2)."),
    (
        None,
        "holds(T,O) :- same_color(T,I), holds(I,O2), has_color(O2,C), has_color(O,C), not same_obj(O,O2).",
    ),
    (
        None,
        "holds(T,O) :- same_shape(T,I), holds(I,O2), has_shape(O2,S), has_shape(O,S), not same_obj(O,O2).",
    ),
    (
        None,
        "holds(T,O) :- same_size(T,I), holds(I,O2), has_size(O2,Z), has_size(O,Z), not same_obj(O,O2).",
    ),
    (None, "val_bool(T,yes) :- equal_integer(T,A,B), val_num(A,N), val_num(B,N)."),
    (None, "val_bool(T,no) :- equal_integer(T,A,B), not val_bool(T,yes)."),
];

/// The complete fixture theory (36 rules).
pub fn full_theory() -> Program {
    let text: String = THEORY.iter().map(|(_, r)| format!("{r}\n")).collect();
    parse_program(&text).expect("fixture theory parses").with_label("Init")
}

/// One of the hand-selected initial theories: Light (5 rules) ⊂ Medium ⊂
/// Heavy ⊂ full.
pub fn tier_theory(tier: Tier) -> Program {
    let text: String = THEORY
        .iter()
        .filter(|(t, _)| t.map_or(false, |t| t <= tier))
        .map(|(_, r)| format!("{r}\n"))
        .collect();
    parse_program(&text).expect("fixture tier parses").with_label(tier.name())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SceneObject {
    pub shape: &'static str,
    pub color: &'static str,
    pub size: &'static str,
    pub material: &'static str,
}

impl SceneObject {
    fn attribute(&self, category: &str) -> &'static str {
        match category {
            "shape" => self.shape,
            "color" => self.color,
            "size" => self.size,
            "material" => self.material,
            other => panic!("unknown attribute category {other}"),
        }
    }
}

/// A scene: objects by id plus a left-to-right rank per object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SceneGraph {
    pub objects: Vec<SceneObject>,
    pub rank: Vec<usize>,
}

impl SceneGraph {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Encode the scene as facts: object attributes, the left-of relation,
    /// object identity, and the successor chain the counting rules consume.
    pub fn to_facts(&self) -> Program {
        let n = self.objects.len();
        let mut text = String::new();
        for (i, o) in self.objects.iter().enumerate() {
            text.push_str(&format!(
                "has_shape({i},{}). has_color({i},{}). has_size({i},{}). has_material({i},{}).\n",
                o.shape, o.color, o.size, o.material
            ));
        }
        for a in 0..n {
            for b in 0..n {
                if self.rank[a] < self.rank[b] {
                    text.push_str(&format!("left_of({a},{b}). "));
                }
            }
        }
        text.push('\n');
        for i in 0..n {
            text.push_str(&format!("same_obj({i},{i}). "));
        }
        text.push('\n');
        for k in 0..n {
            text.push_str(&format!("succ({k},{}). ", k + 1));
        }
        text.push_str(&format!("\nnum_objects({n}).\n"));
        parse_program(&text).expect("scene facts parse")
    }
}

/// Result of evaluating a functional subtree directly on the scene graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Objects(BTreeSet<usize>),
    Num(i64),
    Bool(bool),
    Attr(String),
}

fn filter_category(op: &str) -> Option<(&'static str, &str)> {
    let value = op.strip_prefix("filter_")?;
    let category = if SIZES.contains(&value) {
        "size"
    } else if COLORS.contains(&value) {
        "color"
    } else if SHAPES.contains(&value) {
        "shape"
    } else if MATERIALS.contains(&value) {
        "material"
    } else {
        return None;
    };
    Some((category, value))
}

/// Evaluate a question tree on a scene, independently of any ASP machinery.
pub fn evaluate_tree(node: &FunctionalNode, scene: &SceneGraph) -> Result<Value, String> {
    let inputs: Vec<Value> =
        node.inputs.iter().map(|n| evaluate_tree(n, scene)).collect::<Result<_, _>>()?;
    let objects = |v: &Value| -> Result<BTreeSet<usize>, String> {
        match v {
            Value::Objects(s) => Ok(s.clone()),
            other => Err(format!("expected object set, got {other:?}")),
        }
    };
    let single = |v: &Value| -> Result<usize, String> {
        let set = objects(v)?;
        if set.len() == 1 {
            Ok(*set.iter().next().expect("singleton"))
        } else {
            Err(format!("expected a unique object, got {}", set.len()))
        }
    };
    match node.op.as_str() {
        "scene" => Ok(Value::Objects((0..scene.len()).collect())),
        "exist" => Ok(Value::Bool(!objects(&inputs[0])?.is_empty())),
        "count" => Ok(Value::Num(objects(&inputs[0])?.len() as i64)),
        "unique" => {
            let id = single(&inputs[0])?;
            Ok(Value::Objects([id].into()))
        }
        "union" => {
            let mut set = objects(&inputs[0])?;
            set.extend(objects(&inputs[1])?);
            Ok(Value::Objects(set))
        }
        "and" => {
            let a = objects(&inputs[0])?;
            let b = objects(&inputs[1])?;
            Ok(Value::Objects(a.intersection(&b).copied().collect()))
        }
        "relate_left" => {
            let anchor = single(&inputs[0])?;
            Ok(Value::Objects(
                (0..scene.len()).filter(|&o| scene.rank[o] < scene.rank[anchor]).collect(),
            ))
        }
        "equal_integer" => match (&inputs[0], &inputs[1]) {
            (Value::Num(a), Value::Num(b)) => Ok(Value::Bool(a == b)),
            other => Err(format!("equal_integer needs two numbers, got {other:?}")),
        },
        op if op.starts_with("filter_") => {
            let (category, value) =
                filter_category(op).ok_or_else(|| format!("unknown filter '{op}'"))?;
            Ok(Value::Objects(
                objects(&inputs[0])?
                    .into_iter()
                    .filter(|&o| scene.objects[o].attribute(category) == value)
                    .collect(),
            ))
        }
        op if op.starts_with("query_") => {
            let category = op.strip_prefix("query_").expect("prefix checked");
            let id = single(&inputs[0])?;
            Ok(Value::Attr(scene.objects[id].attribute(category).to_string()))
        }
        op if op.starts_with("same_") => {
            let category = op.strip_prefix("same_").expect("prefix checked");
            let anchor = single(&inputs[0])?;
            let value = scene.objects[anchor].attribute(category);
            Ok(Value::Objects(
                (0..scene.len())
                    .filter(|&o| o != anchor && scene.objects[o].attribute(category) == value)
                    .collect(),
            ))
        }
        other => Err(format!("unknown operation '{other}'")),
    }
}

/// The final answer string for a question tree, or an error for trees whose
/// intermediate results are ill-formed (e.g. non-unique `unique` input).
pub fn gold_answer(node: &FunctionalNode, scene: &SceneGraph) -> Result<String, String> {
    match evaluate_tree(node, scene)? {
        Value::Bool(true) => Ok("yes".to_string()),
        Value::Bool(false) => Ok("no".to_string()),
        Value::Num(n) => Ok(n.to_string()),
        Value::Attr(a) => Ok(a),
        Value::Objects(_) => Err("question root must produce an answer value".to_string()),
    }
}

fn random_scene(rng: &mut ChaCha8Rng) -> SceneGraph {
    let n = rng.gen_range(3..=6);
    let objects = (0..n)
        .map(|_| SceneObject {
            shape: SHAPES[rng.gen_range(0..SHAPES.len())],
            color: COLORS[rng.gen_range(0..COLORS.len())],
            size: SIZES[rng.gen_range(0..SIZES.len())],
            material: MATERIALS[rng.gen_range(0..MATERIALS.len())],
        })
        .collect();
    let mut rank: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        rank.swap(i, j);
    }
    SceneGraph { objects, rank }
}

/// A random filter chain of `depth` filters over `base`, at most one filter
/// per attribute category.
fn random_filter_chain(base: FunctionalNode, depth: usize, rng: &mut ChaCha8Rng) -> FunctionalNode {
    let mut categories = vec!["size", "color", "shape", "material"];
    for i in (1..categories.len()).rev() {
        let j = rng.gen_range(0..=i);
        categories.swap(i, j);
    }
    let mut node = base;
    for category in categories.into_iter().take(depth) {
        let value = match category {
            "size" => SIZES[rng.gen_range(0..SIZES.len())],
            "color" => COLORS[rng.gen_range(0..COLORS.len())],
            "shape" => SHAPES[rng.gen_range(0..SHAPES.len())],
            _ => MATERIALS[rng.gen_range(0..MATERIALS.len())],
        };
        node = FunctionalNode::node(format!("filter_{value}"), vec![node]);
    }
    node
}

/// A filter chain guaranteed to select the given object (built from its own
/// attributes), which makes `unique` inputs likely to be singletons.
fn anchored_filter_chain(
    target: &SceneObject,
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> FunctionalNode {
    let mut categories = vec!["size", "color", "shape", "material"];
    for i in (1..categories.len()).rev() {
        let j = rng.gen_range(0..=i);
        categories.swap(i, j);
    }
    let mut node = FunctionalNode::leaf("scene");
    for category in categories.into_iter().take(depth) {
        node = FunctionalNode::node(format!("filter_{}", target.attribute(category)), vec![node]);
    }
    node
}

/// Question templates; the numbers are filter-chain depths. The schedule
/// below is arranged so the train split covers ten distinct question lengths
/// and every reasoning operation.
#[derive(Clone, Copy, Debug)]
enum Template {
    Exist(usize),
    Count(usize),
    Query(&'static str, usize),
    ExistAnd(usize, usize),
    CountUnion(usize, usize),
    ExistSame(&'static str, usize),
    CountRelate(usize),
    EqualInt(usize, usize),
}

const SCHEDULE: [Template; 20] = [
    Template::Exist(1),              // 4 facts
    Template::Count(1),              // 4
    Template::Query("color", 1),     // 5
    Template::Exist(2),              // 5
    Template::ExistAnd(1, 1),        // 6
    Template::ExistSame("color", 1), // 6
    Template::CountRelate(1),        // 6
    Template::CountUnion(2, 1),      // 7
    Template::ExistSame("shape", 2), // 7
    Template::EqualInt(1, 1),        // 7
    Template::ExistAnd(2, 2),        // 8
    Template::CountRelate(3),        // 8
    Template::EqualInt(2, 1),        // 8
    Template::CountUnion(3, 2),      // 9
    Template::EqualInt(2, 2),        // 9
    Template::EqualInt(3, 2),        // 10
    Template::ExistAnd(3, 4),        // 11
    Template::CountUnion(4, 3),      // 11
    Template::EqualInt(4, 3),        // 12
    Template::EqualInt(4, 4),        // 13
];

fn build_tree(template: Template, scene: &SceneGraph, rng: &mut ChaCha8Rng) -> FunctionalNode {
    use FunctionalNode as N;
    let pick_target = |rng: &mut ChaCha8Rng| rng.gen_range(0..scene.len());
    match template {
        Template::Exist(d) => {
            N::node("exist", vec![random_filter_chain(N::leaf("scene"), d, rng)])
        }
        Template::Count(d) => {
            N::node("count", vec![random_filter_chain(N::leaf("scene"), d, rng)])
        }
        Template::Query(cat, d) => {
            let target = &scene.objects[pick_target(rng)];
            let chain = anchored_filter_chain(target, d, rng);
            N::node(format!("query_{cat}"), vec![N::node("unique", vec![chain])])
        }
        Template::ExistAnd(d1, d2) => N::node(
            "and",
            vec![
                random_filter_chain(N::leaf("scene"), d1, rng),
                random_filter_chain(N::leaf("scene"), d2, rng),
            ],
        )
        .pipe_into("exist"),
        Template::CountUnion(d1, d2) => N::node(
            "union",
            vec![
                random_filter_chain(N::leaf("scene"), d1, rng),
                random_filter_chain(N::leaf("scene"), d2, rng),
            ],
        )
        .pipe_into("count"),
        Template::ExistSame(attr, d) => {
            let target = &scene.objects[pick_target(rng)];
            let chain = anchored_filter_chain(target, d, rng);
            N::node(format!("same_{attr}"), vec![N::node("unique", vec![chain])])
                .pipe_into("exist")
        }
        Template::CountRelate(d) => {
            let target = &scene.objects[pick_target(rng)];
            let chain = anchored_filter_chain(target, d, rng);
            N::node("relate_left", vec![N::node("unique", vec![chain])]).pipe_into("count")
        }
        Template::EqualInt(d1, d2) => N::node(
            "equal_integer",
            vec![
                N::node("count", vec![random_filter_chain(N::leaf("scene"), d1, rng)]),
                N::node("count", vec![random_filter_chain(N::leaf("scene"), d2, rng)]),
            ],
        ),
    }
}

impl FunctionalNode {
    fn pipe_into(self, op: &str) -> FunctionalNode {
        FunctionalNode::node(op, vec![self])
    }
}

/// One generated record: the example plus the artifacts it was built from.
#[derive(Clone, Debug)]
pub struct GeneratedExample {
    pub example: Example,
    pub tree: FunctionalNode,
    pub scene: SceneGraph,
}

/// Generate `n` examples deterministically. Templates are taken round-robin
/// from the schedule; scenes are resampled until the tree evaluates cleanly
/// (every `unique` input a singleton).
pub fn generate_corpus(prefix: &str, n: usize, seed: u64) -> Vec<GeneratedExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let template = SCHEDULE[i % SCHEDULE.len()];
        let generated = loop {
            let scene = random_scene(&mut rng);
            let tree = build_tree(template, &scene, &mut rng);
            if let Ok(answer) = gold_answer(&tree, &scene) {
                let question = translate_functional_to_asp(&tree).expect("generated tree is well-formed");
                let example = Example::new(format!("{prefix}-{i:03}"), question, scene.to_facts(), answer)
                    .expect("generated example is facts-only");
                break GeneratedExample { example, tree, scene };
            }
        };
        out.push(generated);
    }
    out
}

pub fn examples_only(generated: Vec<GeneratedExample>) -> Vec<Example> {
    generated.into_iter().map(|g| g.example).collect()
}
