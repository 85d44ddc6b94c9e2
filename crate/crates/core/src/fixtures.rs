//! Reference automata, hardness families and seeded random instances.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::automata::{
    classify, AnyAutomaton, Automaton, Eva, EvaLabel, Label, StateId, Va, VaLabel,
};
use crate::error::{Error, Result};
use crate::model::{vars, Alphabet, Document, Marker, MarkerSet, Variable};

fn markers(ms: &[Marker]) -> EvaLabel {
    EvaLabel::Markers(ms.iter().cloned().collect())
}

/// Functional VA over `{a}` in which `x` and `y` both span the whole
/// document; the two variables can be opened in either order, so every
/// output has two accepting runs.
pub fn gen_fig3_va() -> Va {
    let mut a = Va::empty(['a'].into(), vars(["x", "y"]));
    let q: Vec<StateId> = (0..6).map(|i| a.add_state(format!("q{i}"))).collect();
    let m = |mk: Marker| VaLabel::Marker(mk);
    a.add_transition(q[0], m(Marker::open("x")), q[1]);
    a.add_transition(q[0], m(Marker::open("y")), q[2]);
    a.add_transition(q[1], m(Marker::open("y")), q[3]);
    a.add_transition(q[2], m(Marker::open("x")), q[3]);
    a.add_transition(q[3], VaLabel::Symbol('a'), q[3]);
    a.add_transition(q[3], m(Marker::close("x")), q[4]);
    a.add_transition(q[4], m(Marker::close("y")), q[5]);
    a.set_final(q[5], true);
    a
}

/// Deterministic functional eVA over `{a, b}` with ten states `q0..q9`. On
/// `ab` it outputs `x=[1,3>,y=[2,3>`, `x=[2,3>,y=[1,3>` and
/// `x=[1,3>,y=[1,3>`.
pub fn gen_fig4_automaton() -> Eva {
    let mut a = Eva::empty(['a', 'b'].into(), vars(["x", "y"]));
    let q: Vec<StateId> = (0..10).map(|i| a.add_state(format!("q{i}"))).collect();
    let (ox, oy, cx, cy) = (
        Marker::open("x"),
        Marker::open("y"),
        Marker::close("x"),
        Marker::close("y"),
    );
    a.add_transition(q[0], markers(std::slice::from_ref(&ox)), q[1]);
    a.add_transition(q[0], markers(std::slice::from_ref(&oy)), q[2]);
    a.add_transition(q[0], markers(&[ox.clone(), oy.clone()]), q[3]);
    a.add_transition(q[3], EvaLabel::Symbol('a'), q[3]);
    a.add_transition(q[3], EvaLabel::Symbol('b'), q[3]);
    a.add_transition(q[3], markers(&[cx.clone(), cy.clone()]), q[9]);
    a.add_transition(q[1], EvaLabel::Symbol('a'), q[4]);
    a.add_transition(q[2], EvaLabel::Symbol('a'), q[5]);
    a.add_transition(q[4], markers(&[oy]), q[6]);
    a.add_transition(q[5], markers(&[ox]), q[7]);
    a.add_transition(q[6], EvaLabel::Symbol('b'), q[8]);
    a.add_transition(q[7], EvaLabel::Symbol('b'), q[8]);
    a.add_transition(q[8], markers(&[cx, cy]), q[9]);
    a.set_final(q[9], true);
    a
}

/// Sequential VA with `3l + 2` states, `4l + 1` transitions and `2l`
/// variables: for each `i`, either `x_i` or `y_i` is opened and closed, and
/// the document must be `a`. Any equivalent eVA needs `2^l` marker-set
/// transitions from `q0` into the state `q` before the letter.
pub fn gen_prop4_family(l: usize) -> Va {
    assert!(l >= 1, "family index starts at 1");
    let names: Vec<String> = (1..=l)
        .flat_map(|i| [format!("x{i}"), format!("y{i}")])
        .collect();
    let mut a = Va::empty(
        ['a'].into(),
        names.iter().map(|s| Variable::new(s)).collect(),
    );
    let mut mid = a.add_state("q0");
    for i in 1..=l {
        let xs = a.add_state(format!("x{i}"));
        let ys = a.add_state(format!("y{i}"));
        let next = a.add_state(if i == l {
            "q".to_string()
        } else {
            format!("m{i}")
        });
        let (x, y) = (format!("x{i}"), format!("y{i}"));
        a.add_transition(mid, VaLabel::Marker(Marker::open(x.as_str())), xs);
        a.add_transition(mid, VaLabel::Marker(Marker::open(y.as_str())), ys);
        a.add_transition(xs, VaLabel::Marker(Marker::close(x.as_str())), next);
        a.add_transition(ys, VaLabel::Marker(Marker::close(y.as_str())), next);
        mid = next;
    }
    let qf = a.add_state("qf");
    a.add_transition(mid, VaLabel::Symbol('a'), qf);
    a.set_final(qf, true);
    a
}

/// Contact-list extraction task: a regex formula with variables `name`,
/// `email` and `phone` over the symbols of [`example1_document`].
pub struct Example1 {
    pub pattern: String,
    pub alphabet: Alphabet,
    pub document: Document,
}

/// The contact-list document `John <j@g.be>, Jane <555-12>` (28 symbols).
pub fn example1_document() -> Document {
    Document::from_text("John <j@g.be>, Jane <555-12>")
}

/// Names are an uppercase letter followed by lowercase letters; emails are
/// lowercase words around `@` with dot-separated parts; phones are digits
/// and dashes. Each sub-formula is spelled out over the document alphabet.
pub fn example1() -> Example1 {
    let document = example1_document();
    let alphabet = document.alphabet();
    let class = |pred: fn(&char) -> bool| -> String {
        let parts: Vec<String> = alphabet
            .iter()
            .filter(|c| pred(c))
            .map(|c| c.to_string())
            .collect();
        format!("({})", parts.join("|"))
    };
    let upper = class(|c| c.is_uppercase());
    let lower = class(|c| c.is_lowercase());
    let phone = class(|c| c.is_ascii_digit() || *c == '-');
    let name = format!("{upper}{lower}*");
    let email = format!(r"{lower}{lower}*@{lower}{lower}*(\.{lower}{lower}*)*");
    let phone = format!("{phone}{phone}*");
    let pattern = format!(".*name{{{name}}} <(email{{{email}}}|phone{{{phone}}})>.*");
    Example1 {
        pattern,
        alphabet,
        document,
    }
}

/// Plain NFA over `{a, b}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Nfa {
    pub num_states: usize,
    pub initial: usize,
    pub finals: BTreeSet<usize>,
    pub transitions: BTreeSet<(usize, char, usize)>,
}

impl Nfa {
    pub fn accepts(&self, word: &[char]) -> bool {
        assert!(self.num_states <= 64, "state sets are bit masks");
        let mut current = 1u64 << self.initial;
        for &c in word {
            let mut next = 0;
            for &(p, a, q) in &self.transitions {
                if a == c && current >> p & 1 == 1 {
                    next |= 1 << q;
                }
            }
            current = next;
        }
        self.finals.iter().any(|&q| current >> q & 1 == 1)
    }

    /// Number of accepted words of length `n`, by trying all `2^n` words.
    pub fn count_words(&self, n: usize) -> u64 {
        let mut count = 0;
        for bits in 0u64..(1 << n) {
            let word: Vec<char> = (0..n)
                .map(|k| if bits >> k & 1 == 1 { 'b' } else { 'a' })
                .collect();
            if self.accepts(&word) {
                count += 1;
            }
        }
        count
    }

    /// Every NFA with `k` states and initial state 0, up to renaming of the
    /// non-initial states: only the lexicographically least member of each
    /// renaming class is produced.
    pub fn enumerate_canonical(k: usize) -> Vec<Nfa> {
        let slots: Vec<(usize, char, usize)> = (0..k)
            .flat_map(|p| {
                ['a', 'b']
                    .into_iter()
                    .flat_map(move |c| (0..k).map(move |q| (p, c, q)))
            })
            .collect();
        let perms = permutations_fixing_zero(k);
        let mut out = Vec::new();
        for tbits in 0u64..(1 << slots.len()) {
            for fbits in 0u64..(1 << k) {
                let code = (tbits, fbits);
                let minimal = perms.iter().all(|perm| {
                    let t = permute_bits(tbits, &slots, perm, k);
                    let f = (0..k)
                        .filter(|q| fbits >> q & 1 == 1)
                        .map(|q| 1u64 << perm[q])
                        .sum();
                    code <= (t, f)
                });
                if !minimal {
                    continue;
                }
                out.push(Nfa {
                    num_states: k,
                    initial: 0,
                    finals: (0..k).filter(|q| fbits >> q & 1 == 1).collect(),
                    transitions: slots
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| tbits >> i & 1 == 1)
                        .map(|(_, s)| *s)
                        .collect(),
                });
            }
        }
        out
    }

    /// States reachable from the initial state and co-reachable to a final
    /// state (the initial state counts as useful when nothing else is).
    fn useful(&self) -> Vec<bool> {
        let k = self.num_states;
        let mut reach = vec![false; k];
        reach[self.initial] = true;
        let mut co: Vec<bool> = (0..k).map(|q| self.finals.contains(&q)).collect();
        for _ in 0..k {
            for &(p, _, q) in &self.transitions {
                reach[q] |= reach[p];
                co[p] |= co[q];
            }
        }
        (0..k).map(|q| reach[q] && co[q]).collect()
    }

    /// True if every state is reachable and co-reachable.
    pub fn is_trim(&self) -> bool {
        self.useful().into_iter().all(|u| u)
    }

    /// Equivalent NFA keeping only useful states, renumbered in order with
    /// the initial state first.
    pub fn trim(&self) -> Nfa {
        let mut keep = self.useful();
        keep[self.initial] = true;
        let order: Vec<usize> = std::iter::once(self.initial)
            .chain((0..self.num_states).filter(|&q| keep[q] && q != self.initial))
            .collect();
        let index = |q: usize| order.iter().position(|&r| r == q);
        let useful = self.useful();
        Nfa {
            num_states: order.len(),
            initial: 0,
            finals: self
                .finals
                .iter()
                .filter(|&&q| useful[q])
                .filter_map(|&q| index(q))
                .collect(),
            transitions: self
                .transitions
                .iter()
                .filter(|(p, _, q)| useful[*p] && useful[*q])
                .map(|&(p, c, q)| (index(p).expect("kept"), c, index(q).expect("kept")))
                .collect(),
        }
    }

    /// Random NFA with `k` states; each possible transition is present with
    /// probability `density`.
    pub fn random(seed: u64, k: usize, density: f64) -> Nfa {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut transitions = BTreeSet::new();
        for p in 0..k {
            for c in ['a', 'b'] {
                for q in 0..k {
                    if rng.gen_bool(density) {
                        transitions.insert((p, c, q));
                    }
                }
            }
        }
        let finals = (0..k).filter(|_| rng.gen_bool(0.5)).collect();
        Nfa {
            num_states: k,
            initial: 0,
            finals,
            transitions,
        }
    }
}

fn permutations_fixing_zero(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut rest: Vec<usize> = (1..k).collect();
    permute(&mut rest, 0, &mut out);
    out.into_iter()
        .map(|r| std::iter::once(0).chain(r).collect())
        .collect()
}

fn permute(v: &mut Vec<usize>, i: usize, out: &mut Vec<Vec<usize>>) {
    if i >= v.len() {
        out.push(v.clone());
        return;
    }
    for j in i..v.len() {
        v.swap(i, j);
        permute(v, i + 1, out);
        v.swap(i, j);
    }
}

fn permute_bits(bits: u64, slots: &[(usize, char, usize)], perm: &[usize], k: usize) -> u64 {
    let index = |(p, c, q): (usize, char, usize)| p * 2 * k + usize::from(c == 'b') * k + q;
    slots
        .iter()
        .enumerate()
        .filter(|(i, _)| bits >> i & 1 == 1)
        .map(|(_, &(p, c, q))| 1u64 << index((perm[p], c, perm[q])))
        .sum()
}

/// Functional VA `A` over `{c, #}` and document `(#cc)^n` such that
/// `|⟦A⟧_d|` is the number of words of length `n` accepted by `b`.
///
/// States are `(q, i)` for NFA states `q` and levels `0..=n`. A transition
/// `(q, a, q')` of the NFA becomes, at level `i`, the path
/// `# ⊢x_i c ⊣x_i c` from `(q, i-1)` to `(q', i)`; letter `b` becomes
/// `# c ⊢x_i c ⊣x_i`. So `x_i = [3i-1, 3i>` encodes `a` and
/// `x_i = [3i, 3i+1>` encodes `b`.
pub fn census_reduction(b: &Nfa, n: usize) -> (Va, Document) {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut a = Va::empty(
        ['c', '#'].into(),
        names.iter().map(|s| Variable::new(s)).collect(),
    );
    let mut layer = vec![vec![0; b.num_states]; n + 1];
    // The initial state comes first so that it gets index 0.
    layer[0][b.initial] = a.add_state(format!("({},0)", b.initial));
    for (i, row) in layer.iter_mut().enumerate() {
        for (q, slot) in row.iter_mut().enumerate() {
            if !(i == 0 && q == b.initial) {
                *slot = a.add_state(format!("({q},{i})"));
            }
        }
    }
    for i in 1..=n {
        let x = names[i - 1].as_str();
        for &(p, letter, q) in &b.transitions {
            let labels = match letter {
                'a' => [
                    VaLabel::Symbol('#'),
                    VaLabel::Marker(Marker::open(x)),
                    VaLabel::Symbol('c'),
                    VaLabel::Marker(Marker::close(x)),
                    VaLabel::Symbol('c'),
                ],
                _ => [
                    VaLabel::Symbol('#'),
                    VaLabel::Symbol('c'),
                    VaLabel::Marker(Marker::open(x)),
                    VaLabel::Symbol('c'),
                    VaLabel::Marker(Marker::close(x)),
                ],
            };
            let prefix = format!("({p},{letter},{q},{i}).");
            let mut from = layer[i - 1][p];
            for (k, label) in labels.into_iter().enumerate() {
                let to = if k == 4 {
                    layer[i][q]
                } else {
                    let mut name = prefix.clone();
                    name.push(char::from(b'1' + k as u8));
                    a.add_state(name)
                };
                a.add_transition(from, label, to);
                from = to;
            }
        }
    }
    for &f in &b.finals {
        a.set_final(layer[n][f], true);
    }
    let doc = Document::from_text(&"#cc".repeat(n));
    (a, doc)
}

/// Transitions of `b` that lie on some accepting path of length `n`,
/// recorded per level as a bit set over `(p, letter, q)` triples.
///
/// The useful part of [`census_reduction`]`(b, n)` consists exactly of the
/// gadgets of these transitions, so NFAs with equal signatures yield the
/// same automaton once trimmed. Needs at most 3 states and `n <= 7`.
pub fn census_signature(b: &Nfa, n: usize) -> u128 {
    let k = b.num_states;
    assert!(k <= 3 && n <= 7, "signature does not fit in 128 bits");
    let mut reach = vec![vec![false; k]; n + 1];
    reach[0][b.initial] = true;
    for i in 1..=n {
        for &(p, _, q) in &b.transitions {
            if reach[i - 1][p] {
                reach[i][q] = true;
            }
        }
    }
    let mut co = vec![vec![false; k]; n + 1];
    for &f in &b.finals {
        co[n][f] = true;
    }
    for i in (0..n).rev() {
        for &(p, _, q) in &b.transitions {
            if co[i + 1][q] {
                co[i][p] = true;
            }
        }
    }
    let mut sig = 0u128;
    for i in 1..=n {
        for &(p, c, q) in &b.transitions {
            if reach[i - 1][p] && co[i][q] {
                let slot = (p * 2 + usize::from(c == 'b')) * 3 + q;
                sig |= 1 << ((i - 1) * 18 + slot);
            }
        }
    }
    sig
}

/// Word of length `n` encoded by an output of [`census_reduction`], or
/// `None` if the mapping is not of the expected shape.
pub fn census_decode(m: &crate::model::Mapping, n: usize) -> Option<Vec<char>> {
    (1..=n)
        .map(|i| {
            let span = m.get(&Variable::new(&format!("x{i}")))?;
            match (span.start, span.end) {
                (s, e) if s == 3 * i - 1 && e == 3 * i => Some('a'),
                (s, e) if s == 3 * i && e == 3 * i + 1 => Some('b'),
                _ => None,
            }
        })
        .collect()
}

/// Which kind of automaton [`random_instance`] produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Kind {
    Va,
    Eva,
}

/// Constraints on random instances.
#[derive(Clone, Debug, Serialize)]
pub struct Profile {
    pub kind: Kind,
    pub max_states: usize,
    pub max_vars: usize,
    pub alphabet: Alphabet,
    /// Probability of each candidate transition.
    pub density: f64,
    pub sequential: bool,
    pub functional: bool,
    pub deterministic: bool,
    /// When false, transitions are drawn without regard to variable
    /// discipline (the constraints above are then only filters).
    pub structured: bool,
}

impl Profile {
    /// Functional eVA, ≤ 6 states, ≤ 3 variables over `{a, b}`.
    pub fn functional_eva() -> Self {
        Profile {
            kind: Kind::Eva,
            max_states: 6,
            max_vars: 3,
            alphabet: ['a', 'b'].into(),
            density: 0.35,
            sequential: true,
            functional: true,
            deterministic: false,
            structured: true,
        }
    }

    pub fn det_seva() -> Self {
        Profile {
            sequential: true,
            functional: false,
            deterministic: true,
            ..Self::functional_eva()
        }
    }

    pub fn functional_va() -> Self {
        Profile {
            kind: Kind::Va,
            ..Self::functional_eva()
        }
    }

    pub fn sequential_va() -> Self {
        Profile {
            kind: Kind::Va,
            functional: false,
            ..Self::functional_eva()
        }
    }

    /// Arbitrary VA, possibly non-sequential.
    pub fn any_va() -> Self {
        Profile {
            kind: Kind::Va,
            sequential: false,
            functional: false,
            structured: false,
            density: 0.2,
            ..Self::functional_eva()
        }
    }

    pub fn with_limits(mut self, max_states: usize, max_vars: usize) -> Self {
        self.max_states = max_states;
        self.max_vars = max_vars;
        self
    }
}

/// Abstract variable status used by the structured generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum St {
    Unseen,
    Open,
    Closed,
}

/// Markers turning status `from` into `to`, if `to` is a valid successor.
fn status_step(from: &[St], to: &[St], vars: &[Variable]) -> Option<MarkerSet> {
    let mut out = MarkerSet::new();
    for ((f, t), x) in from.iter().zip(to).zip(vars) {
        match (f, t) {
            (a, b) if a == b => {}
            (St::Unseen, St::Open) => {
                out.insert(Marker::open(x.clone()));
            }
            (St::Open, St::Closed) => {
                out.insert(Marker::close(x.clone()));
            }
            (St::Unseen, St::Closed) => {
                out.insert(Marker::open(x.clone()));
                out.insert(Marker::close(x.clone()));
            }
            _ => return None,
        }
    }
    Some(out)
}

/// Random chain of statuses from all-unseen to all-closed: one variable
/// event at a time, in random order, opens before the matching close.
fn random_chain(rng: &mut ChaCha8Rng, l: usize) -> Vec<Vec<St>> {
    let mut events: Vec<(usize, bool)> = Vec::new();
    let mut pending: Vec<usize> = (0..l).collect();
    let mut opened: Vec<usize> = Vec::new();
    while !pending.is_empty() || !opened.is_empty() {
        let open = !pending.is_empty() && (opened.is_empty() || rng.gen_bool(0.5));
        if open {
            let k = rng.gen_range(0..pending.len());
            let v = pending.swap_remove(k);
            opened.push(v);
            events.push((v, true));
        } else {
            let k = rng.gen_range(0..opened.len());
            let v = opened.swap_remove(k);
            events.push((v, false));
        }
    }
    let mut cur = vec![St::Unseen; l];
    let mut chain = vec![cur.clone()];
    for (v, open) in events {
        cur[v] = if open { St::Open } else { St::Closed };
        chain.push(cur.clone());
    }
    chain
}

fn generate(rng: &mut ChaCha8Rng, p: &Profile) -> AnyAutomaton {
    let n = rng.gen_range(1..=p.max_states.max(1));
    let l = rng.gen_range(0..=p.max_vars);
    let var_list: Vec<Variable> = ["x", "y", "z", "u", "v", "w"]
        .iter()
        .take(l)
        .map(|s| Variable::new(s))
        .chain((6..l).map(|i| Variable::new(&format!("x{i}"))))
        .collect();
    let var_set: BTreeSet<Variable> = var_list.iter().cloned().collect();
    let sigma: Vec<char> = p.alphabet.iter().copied().collect();

    // Statuses for the structured generator.
    let statuses: Vec<Vec<St>> = if p.structured {
        let chains = [random_chain(rng, l), random_chain(rng, l)];
        (0..n)
            .map(|q| {
                if q == 0 {
                    vec![St::Unseen; l]
                } else {
                    let chain = &chains[rng.gen_range(0..2)];
                    chain[rng.gen_range(0..chain.len())].clone()
                }
            })
            .collect()
    } else {
        vec![Vec::new(); n]
    };
    let done = |q: usize| statuses[q].iter().all(|s| *s == St::Closed);
    let no_open = |q: usize| statuses[q].iter().all(|s| *s != St::Open);
    let finals: Vec<bool> = (0..n)
        .map(|q| {
            let allowed = !p.structured || if p.functional { done(q) } else { no_open(q) };
            allowed && rng.gen_bool(0.4)
        })
        .collect();

    // Candidate transitions: (p, label, q) as VA or eVA labels.
    let mut letter_moves = Vec::new();
    let mut marker_moves: Vec<(usize, MarkerSet, usize)> = Vec::new();
    for s in 0..n {
        for t in 0..n {
            let same = !p.structured || statuses[s] == statuses[t];
            for &c in &sigma {
                if same && rng.gen_bool(p.density) {
                    letter_moves.push((s, c, t));
                }
            }
            if p.structured {
                if let Some(set) = status_step(&statuses[s], &statuses[t], &var_list) {
                    let ok = !set.is_empty()
                        && match p.kind {
                            Kind::Va => set.len() == 1,
                            Kind::Eva => true,
                        };
                    if ok && rng.gen_bool(p.density.max(0.5)) {
                        marker_moves.push((s, set, t));
                    }
                }
            } else if l > 0 && rng.gen_bool(p.density) {
                let x = var_list[rng.gen_range(0..l)].clone();
                let m = if rng.gen_bool(0.5) {
                    Marker::open(x)
                } else {
                    Marker::close(x)
                };
                marker_moves.push((s, MarkerSet::singleton(m), t));
            }
        }
    }
    // For VA, also allow chains that step two statuses at once through an
    // intermediate state; the structured status sets already cover this.
    letter_moves.shuffle(rng);
    marker_moves.shuffle(rng);

    fn finish<L: Label>(
        mut a: Automaton<L>,
        finals: &[bool],
        det: bool,
        moves: Vec<(usize, L, usize)>,
    ) -> Automaton<L> {
        for (q, &f) in finals.iter().enumerate() {
            a.set_final(q, f);
        }
        for (s, l, t) in moves {
            if det && a.out(s).iter().any(|(m, _)| *m == l) {
                continue;
            }
            a.add_transition(s, l, t);
        }
        a
    }

    let alphabet = p.alphabet.clone();
    match p.kind {
        Kind::Va => {
            let mut a = Va::empty(alphabet, var_set);
            for q in 0..n {
                a.add_state(format!("q{q}"));
            }
            let moves = letter_moves
                .into_iter()
                .map(|(s, c, t)| (s, VaLabel::Symbol(c), t))
                .chain(marker_moves.into_iter().map(|(s, set, t)| {
                    (
                        s,
                        VaLabel::Marker(set.iter().next().expect("nonempty").clone()),
                        t,
                    )
                }))
                .collect();
            AnyAutomaton::Va(finish(a, &finals, p.deterministic, moves))
        }
        Kind::Eva => {
            let mut a = Eva::empty(alphabet, var_set);
            for q in 0..n {
                a.add_state(format!("q{q}"));
            }
            let moves = letter_moves
                .into_iter()
                .map(|(s, c, t)| (s, EvaLabel::Symbol(c), t))
                .chain(
                    marker_moves
                        .into_iter()
                        .map(|(s, set, t)| (s, EvaLabel::Markers(set), t)),
                )
                .collect();
            AnyAutomaton::Eva(finish(a, &finals, p.deterministic, moves))
        }
    }
}

fn satisfies(a: &AnyAutomaton, p: &Profile) -> bool {
    let r = match a {
        AnyAutomaton::Va(a) => classify(a),
        AnyAutomaton::Eva(a) => classify(a),
    }
    .expect("small variable count");
    (!p.sequential || r.sequential)
        && (!p.functional || r.functional)
        && (!p.deterministic || r.deterministic)
}

/// Attempts made by [`random_instance`] before giving up.
pub const MAX_ATTEMPTS: usize = 1000;

/// Seeded random automaton satisfying `profile`. The same seed and profile
/// always give the same automaton.
pub fn random_instance(seed: u64, profile: &Profile) -> Result<AnyAutomaton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let a = generate(&mut rng, profile);
        if satisfies(&a, profile) {
            return Ok(a);
        }
    }
    Err(Error::ProfileUnsatisfiable(MAX_ATTEMPTS))
}

/// Random eVA instance; panics if the profile produces VA.
pub fn random_eva(seed: u64, profile: &Profile) -> Eva {
    match random_instance(seed, profile).expect("satisfiable profile") {
        AnyAutomaton::Eva(a) => a,
        AnyAutomaton::Va(_) => panic!("profile produces VA"),
    }
}

/// Random VA instance; panics if the profile produces eVA.
pub fn random_va(seed: u64, profile: &Profile) -> Va {
    match random_instance(seed, profile).expect("satisfiable profile") {
        AnyAutomaton::Va(a) => a,
        AnyAutomaton::Eva(_) => panic!("profile produces eVA"),
    }
}

/// One entry of a corpus manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusEntry {
    pub seed: u64,
    pub states: usize,
    pub transitions: usize,
    pub sha256: String,
}

/// Manifest of the instances generated from `seeds`, with a checksum over
/// their JSON serializations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusManifest {
    pub profile: String,
    pub entries: Vec<CorpusEntry>,
    pub checksum: String,
}

pub fn corpus_manifest(
    name: &str,
    profile: &Profile,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<CorpusManifest> {
    let mut total = Sha256::new();
    let mut entries = Vec::new();
    for seed in seeds {
        let a = random_instance(seed, profile)?;
        let json = a.to_json();
        let digest = Sha256::digest(json.as_bytes());
        total.update(digest);
        let (states, transitions) = match &a {
            AnyAutomaton::Va(a) => (a.num_states(), a.num_transitions()),
            AnyAutomaton::Eva(a) => (a.num_states(), a.num_transitions()),
        };
        entries.push(CorpusEntry {
            seed,
            states,
            transitions,
            sha256: hex::encode(digest),
        });
    }
    Ok(CorpusManifest {
        profile: name.to_string(),
        entries,
        checksum: hex::encode(total.finalize()),
    })
}

/// All words of length `len` over `alphabet`, in lexicographic order.
pub fn all_documents(alphabet: &Alphabet, len: usize) -> Vec<Document> {
    let sigma: Vec<char> = alphabet.iter().copied().collect();
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w: Vec<char>| {
                sigma.iter().map(move |&c| {
                    let mut v = w.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(Document::from_symbols).collect()
}

/// All documents of length at most `max_len`.
pub fn documents_up_to(alphabet: &Alphabet, max_len: usize) -> Vec<Document> {
    (0..=max_len)
        .flat_map(|n| all_documents(alphabet, n))
        .collect()
}
