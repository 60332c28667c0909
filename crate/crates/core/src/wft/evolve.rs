//! Event-driven evolution of fronts and the vehicle over one splitting window.
//!
//! Fronts far from the vehicle move with constant speed and their collisions
//! are solved exactly. Fronts that can reach the support of `φ(· − y)` are
//! advanced with one RK4 step from an anchor refreshed at every slab
//! boundary and whenever the vehicle changes its motion; their collision
//! times are bracketed on the slab and bisected.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::front::{fan_riemann, Front, FrontKind, FrontList, WftParams};
use crate::error::{Error, Result};
use crate::model::BottleneckParams;
use crate::scalar::Scalar;

const NIL: usize = usize::MAX;

/// Fronts at least this strong are reported when they absorb bottleneck waves.
pub const STRONG_FRONT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionKind {
    /// The vehicle passed a front.
    Crossing,
    /// A front caught the vehicle from behind.
    Overtaken,
    /// The vehicle got stuck on a front and now travels with it.
    Glued,
    /// The vehicle left the front it was travelling with.
    Released,
    /// A strong front absorbed a wave emitted by the bottleneck.
    Wake,
}

impl InteractionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::Crossing => "crossing",
            InteractionKind::Overtaken => "overtaken",
            InteractionKind::Glued => "glued",
            InteractionKind::Released => "released",
            InteractionKind::Wake => "wake",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interaction<T> {
    pub t: T,
    pub y: T,
    pub kind: InteractionKind,
    pub left: T,
    pub right: T,
}

#[derive(Debug, Clone)]
pub struct WindowOutcome<T> {
    pub fronts: FrontList<T>,
    pub y: T,
    /// Vehicle trajectory knots `(t, y)`; linear in between.
    pub knots: Vec<(T, T)>,
    pub events: usize,
    pub interactions: Vec<Interaction<T>>,
    pub warnings: Vec<String>,
}

/// Position tolerance matching a time tolerance.
pub fn position_tol<T: Scalar>(params: &BottleneckParams<T>, wp: &WftParams<T>) -> T {
    T::lit(4.0) * params.phi.v_bar * wp.event_tol
}

/// Resolves every source-generated front and every rarefaction shock
/// stronger than `δ_ν` into its approximate Riemann fan, then moves fronts
/// off the vehicle position.
pub fn prepare_window<T: Scalar>(
    fl: &FrontList<T>,
    y: T,
    params: &BottleneckParams<T>,
    wp: &WftParams<T>,
) -> FrontList<T> {
    let tol = position_tol(params, wp);
    let mut fronts = Vec::with_capacity(fl.fronts.len());
    for f in &fl.fronts {
        let split = match f.kind {
            FrontKind::SourceGenerated => true,
            FrontKind::RarefactionShock => f.strength() > wp.delta_nu,
            FrontKind::Shock => false,
        };
        if split {
            for (l, r, kind) in fan_riemann(f.left, f.right, wp.delta_nu) {
                fronts.push(Front {
                    generated: f.generated,
                    ..Front::new(f.pos, l, r, kind)
                });
            }
        } else {
            fronts.push(*f);
        }
    }
    let k = fronts.partition_point(|f| f.pos < y);
    let mut bound = y - T::two() * tol;
    for f in fronts[..k].iter_mut().rev() {
        if f.pos > bound {
            f.pos = bound;
        }
        bound = f.pos;
    }
    let mut bound = y + T::two() * tol;
    for f in fronts[k..].iter_mut() {
        if f.pos < bound {
            f.pos = bound;
        }
        bound = f.pos;
    }
    FrontList {
        left_state: fl.left_state,
        fronts,
    }
}

#[derive(Debug, Clone)]
struct Node<T> {
    sa: T,
    ta: T,
    left: T,
    right: T,
    kind: FrontKind,
    c: T,
    linear: bool,
    /// Outside the support of `φ(· − y)` up to this time whatever the vehicle does.
    far_until: T,
    generated: bool,
    alive: bool,
    version: u32,
    prev: usize,
    next: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Elem {
    Node(usize),
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Free,
    Glued(usize),
}

#[derive(Debug, Clone, Copy)]
struct Vehicle<T> {
    ta: T,
    ya: T,
    v: T,
    mode: Mode,
    /// Node immediately left of the vehicle when free.
    yl: usize,
    version: u32,
}

/// Earlier pieces `(t, y, v)` of the vehicle path within the current slab.
type History<T> = Vec<(T, T, T)>;

#[derive(Debug, Clone, Copy)]
struct Ev<T> {
    t: T,
    seq: u64,
    a: Elem,
    b: Elem,
    va: u32,
    vb: u32,
}

impl<T: Scalar> PartialEq for Ev<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Ev<T> {}

impl<T: Scalar> PartialOrd for Ev<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Ev<T> {
    // reversed: BinaryHeap pops the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .t
            .partial_cmp(&self.t)
            .unwrap_or(Ordering::Equal)
            .then(other.seq.cmp(&self.seq))
    }
}

struct Engine<'a, T> {
    nodes: Vec<Node<T>>,
    head: usize,
    left_state: T,
    y: Vehicle<T>,
    history: History<T>,
    near: Vec<usize>,
    heap: BinaryHeap<Ev<T>>,
    seq: u64,
    params: &'a BottleneckParams<T>,
    wp: &'a WftParams<T>,
    phi0: T,
    reach: T,
    t1: T,
    slab_end: T,
    tol_x: T,
    knots: Vec<(T, T)>,
    interactions: Vec<Interaction<T>>,
    warnings: Vec<String>,
    events: usize,
    wake_logged: bool,
}

/// Evolves `fl` and the vehicle at `y` from `t0` to `t1`. Fronts must already
/// be resolved into entropic shocks and rarefaction shocks (see
/// [`prepare_window`]).
pub fn evolve_window<T: Scalar>(
    fl: &FrontList<T>,
    y: T,
    params: &BottleneckParams<T>,
    wp: &WftParams<T>,
    t0: T,
    t1: T,
) -> Result<WindowOutcome<T>> {
    let phi = &params.phi;
    let lip = phi.prime_sup();
    let reach = phi.v_bar + params.w_max;
    let mut slab = t1 - t0;
    if lip > T::zero() {
        slab = slab.min(T::quarter() / lip);
    }
    slab = slab.min(phi.beta / (T::lit(4.0) * reach));

    let mut e = Engine {
        nodes: Vec::with_capacity(fl.fronts.len() + 16),
        head: NIL,
        left_state: fl.left_state,
        y: Vehicle {
            ta: t0,
            ya: y,
            v: params.w_max * (T::one() - fl.eval(y)),
            mode: Mode::Free,
            yl: NIL,
            version: 0,
        },
        history: Vec::new(),
        near: Vec::new(),
        heap: BinaryHeap::new(),
        seq: 0,
        params,
        wp,
        phi0: phi.eval(T::zero()),
        reach,
        t1,
        slab_end: t0,
        tol_x: position_tol(params, wp),
        knots: vec![(t0, y)],
        interactions: Vec::new(),
        warnings: Vec::new(),
        events: 0,
        wake_logged: false,
    };
    let mut prev = NIL;
    for f in &fl.fronts {
        let id = e.new_node(f.pos, t0, f.left, f.right, f.kind, f.generated);
        e.nodes[id].prev = prev;
        if prev == NIL {
            e.head = id;
        } else {
            e.nodes[prev].next = id;
        }
        if f.pos < y {
            e.y.yl = id;
        }
        prev = id;
    }
    for id in 0..e.nodes.len() {
        if e.nodes[id].linear {
            e.schedule(Elem::Node(id), t0);
        }
    }

    let mut cur = t0;
    while cur < t1 {
        let mut sigma = cur + slab;
        if sigma > t1 || t1 - sigma < slab * T::lit(1e-6) {
            sigma = t1;
        }
        e.slab_end = sigma;
        e.reanchor_near(cur);
        e.history.clear();
        e.schedule_near(cur);
        while let Some(ev) = e.heap.peek().copied() {
            if ev.t > sigma {
                break;
            }
            e.heap.pop();
            if !e.valid(&ev) {
                continue;
            }
            e.events += 1;
            if e.events > wp.max_events {
                return Err(Error::TooManyEvents {
                    t: ev.t.to_f64_lossy(),
                    limit: wp.max_events,
                });
            }
            let tc = ev.t.max(cur);
            match (ev.a, ev.b) {
                (Elem::Node(a), Elem::Node(b)) => e.collide(a, b, tc),
                (Elem::Y, Elem::Node(r)) => e.vehicle_meets(r, tc, true),
                (Elem::Node(l), Elem::Y) => e.vehicle_meets(l, tc, false),
                _ => unreachable!("vehicle paired with itself"),
            }
        }
        cur = sigma;
    }
    Ok(e.finish())
}

impl<T: Scalar> Engine<'_, T> {
    fn new_node(&mut self, pos: T, t: T, left: T, right: T, kind: FrontKind, generated: bool) -> usize {
        let id = self.nodes.len();
        let far_until = self.far_until(pos, t);
        let linear = far_until > self.t1;
        self.nodes.push(Node {
            sa: pos,
            ta: t,
            left,
            right,
            kind,
            c: T::one() - left - right,
            linear,
            far_until,
            generated,
            alive: true,
            version: 0,
            prev: NIL,
            next: NIL,
        });
        if !linear {
            self.near.push(id);
        }
        id
    }

    fn far_until(&self, pos: T, t: T) -> T {
        let d = (pos - self.y_at(t)).abs() - self.params.phi.beta - self.tol_x;
        if d > T::zero() {
            t + d / self.reach
        } else {
            T::neg_infinity()
        }
    }

    fn y_at(&self, t: T) -> T {
        if t >= self.y.ta {
            return self.y.ya + self.y.v * (t - self.y.ta);
        }
        let k = self.history.partition_point(|seg| seg.0 <= t);
        let (ta, ya, v) = self.history[k.saturating_sub(1)];
        ya + v * (t - ta)
    }

    fn pos(&self, id: usize, t: T) -> T {
        let n = &self.nodes[id];
        let h = t - n.ta;
        if self.y.mode == Mode::Glued(id) {
            return n.sa + self.phi0 * n.c * h;
        }
        let v_bar = self.params.phi.v_bar;
        if n.linear || h == T::zero() || t <= n.far_until {
            return n.sa + v_bar * n.c * h;
        }
        let phi = &self.params.phi;
        let f = |s: T, t: T| n.c * phi.eval(s - self.y_at(t));
        let half = h * T::half();
        let k1 = f(n.sa, n.ta);
        let k2 = f(n.sa + half * k1, n.ta + half);
        let k3 = f(n.sa + half * k2, n.ta + half);
        let k4 = f(n.sa + h * k3, t);
        n.sa + h / T::lit(6.0) * (k1 + T::two() * (k2 + k3) + k4)
    }

    fn elem_pos(&self, e: Elem, t: T) -> T {
        match e {
            Elem::Node(id) => self.pos(id, t),
            Elem::Y => self.y_at(t),
        }
    }

    fn free(&self) -> bool {
        self.y.mode == Mode::Free
    }

    fn after_y(&self) -> usize {
        if self.y.yl == NIL {
            self.head
        } else {
            self.nodes[self.y.yl].next
        }
    }

    fn right_of(&self, e: Elem) -> Option<Elem> {
        let next = match e {
            Elem::Node(id) => {
                if self.free() && self.y.yl == id {
                    return Some(Elem::Y);
                }
                self.nodes[id].next
            }
            Elem::Y => self.after_y(),
        };
        (next != NIL).then_some(Elem::Node(next))
    }

    fn left_of(&self, e: Elem) -> Option<Elem> {
        let prev = match e {
            Elem::Node(id) => {
                if self.free() && self.after_y() == id {
                    return Some(Elem::Y);
                }
                self.nodes[id].prev
            }
            Elem::Y => self.y.yl,
        };
        (prev != NIL).then_some(Elem::Node(prev))
    }

    fn version(&self, e: Elem) -> u32 {
        match e {
            Elem::Node(id) => self.nodes[id].version,
            Elem::Y => self.y.version,
        }
    }

    fn valid(&self, ev: &Ev<T>) -> bool {
        let live = |e: Elem| match e {
            Elem::Node(id) => self.nodes[id].alive,
            Elem::Y => self.free(),
        };
        live(ev.a)
            && live(ev.b)
            && self.version(ev.a) == ev.va
            && self.version(ev.b) == ev.vb
            && self.right_of(ev.a) == Some(ev.b)
    }

    fn push(&mut self, t: T, a: Elem, b: Elem) {
        self.seq += 1;
        self.heap.push(Ev {
            t,
            seq: self.seq,
            a,
            b,
            va: self.version(a),
            vb: self.version(b),
        });
    }

    fn is_linear(&self, e: Elem) -> bool {
        matches!(e, Elem::Node(id) if self.nodes[id].linear)
    }

    /// Schedules the first meeting of `a` and its right neighbour after `lo`.
    fn schedule(&mut self, a: Elem, lo: T) {
        let Some(b) = self.right_of(a) else { return };
        if self.is_linear(a) && self.is_linear(b) {
            let (Elem::Node(ia), Elem::Node(ib)) = (a, b) else {
                unreachable!()
            };
            let v_bar = self.params.phi.v_bar;
            let gap = self.pos(ib, lo) - self.pos(ia, lo);
            let rate = v_bar * (self.nodes[ib].c - self.nodes[ia].c);
            if gap < T::zero() {
                self.push(lo, a, b);
            } else if rate < T::zero() {
                let t = lo + gap / -rate;
                if t <= self.t1 {
                    self.push(t, a, b);
                }
            }
            return;
        }
        let hi = self.slab_end;
        if lo > hi {
            return;
        }
        // the vehicle only counts as crossed once it is clearly past the front
        let slack = if a == Elem::Y || b == Elem::Y {
            self.tol_x
        } else {
            T::zero()
        };
        let gap = |t: T| self.elem_pos(b, t) - self.elem_pos(a, t) + slack;
        if !(gap(hi) < T::zero()) {
            return;
        }
        if gap(lo) < T::zero() {
            self.push(lo, a, b);
            return;
        }
        let (mut l, mut h) = (lo, hi);
        while h - l > self.wp.event_tol {
            let m = (l + h) * T::half();
            if m <= l || m >= h {
                break;
            }
            if gap(m) < T::zero() {
                h = m;
            } else {
                l = m;
            }
        }
        self.push(h, a, b);
    }

    /// Left elements of every pair that involves a near front or the vehicle.
    fn near_pairs(&mut self) -> Vec<Elem> {
        let nodes = &self.nodes;
        self.near.retain(|&id| nodes[id].alive);
        let mut out = Vec::with_capacity(2 * self.near.len() + 2);
        for &id in &self.near {
            out.push(Elem::Node(id));
            if let Some(l) = self.left_of(Elem::Node(id)) {
                out.push(l);
            }
        }
        if self.free() {
            out.push(Elem::Y);
            if let Some(l) = self.left_of(Elem::Y) {
                out.push(l);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn schedule_near(&mut self, lo: T) {
        let pairs = self.near_pairs();
        self.schedule_all(pairs, lo);
    }

    /// Schedules the pairs around `ids` and around the vehicle.
    fn schedule_around(&mut self, ids: &[usize], lo: T) {
        let mut out = Vec::with_capacity(2 * ids.len() + 2);
        for &id in ids.iter().filter(|&&id| self.nodes[id].alive) {
            out.push(Elem::Node(id));
            if let Some(l) = self.left_of(Elem::Node(id)) {
                out.push(l);
            }
        }
        if self.free() {
            out.push(Elem::Y);
            if let Some(l) = self.left_of(Elem::Y) {
                out.push(l);
            }
        }
        out.sort_unstable();
        out.dedup();
        self.schedule_all(out, lo);
    }

    fn schedule_all(&mut self, pairs: Vec<Elem>, lo: T) {
        for a in pairs {
            if !(self.is_linear(a) && self.right_of(a).is_some_and(|b| self.is_linear(b))) {
                self.schedule(a, lo);
            }
        }
    }

    fn reanchor(&mut self, id: usize, t: T, pos: T) {
        let far_until = self.far_until(pos, t);
        let n = &mut self.nodes[id];
        n.sa = pos;
        n.ta = t;
        n.far_until = far_until;
        n.version += 1;
    }

    /// Moves the anchor of every near front that may feel the vehicle before
    /// the slab ends; returns those fronts.
    fn reanchor_near(&mut self, t: T) -> Vec<usize> {
        let nodes = &self.nodes;
        let end = self.slab_end;
        self.near.retain(|&id| nodes[id].alive);
        let moved: Vec<(usize, T)> = self
            .near
            .iter()
            .filter(|&&id| nodes[id].far_until < end)
            .map(|&id| (id, self.pos(id, t)))
            .collect();
        for &(id, p) in &moved {
            self.reanchor(id, t, p);
        }
        moved.into_iter().map(|(id, _)| id).collect()
    }

    fn state_at_vehicle(&self) -> T {
        if self.y.yl == NIL {
            self.left_state
        } else {
            self.nodes[self.y.yl].right
        }
    }

    fn kill(&mut self, id: usize) {
        let n = &mut self.nodes[id];
        n.alive = false;
        n.version += 1;
    }

    fn collide(&mut self, a: usize, b: usize, tc: T) {
        let p = (self.pos(a, tc) + self.pos(b, tc)) * T::half();
        let glued = matches!(self.y.mode, Mode::Glued(g) if g == a || g == b);
        let before = self.nodes[a].prev;
        let after = self.nodes[b].next;
        let (l, r) = (self.nodes[a].left, self.nodes[b].right);
        let generated = self.nodes[a].generated && self.nodes[b].generated;
        if !self.wake_logged {
            let strong = T::lit(STRONG_FRONT);
            let wake = |x: usize, o: usize| {
                let n = &self.nodes[x];
                !n.generated && (n.left - n.right).abs() >= strong && self.nodes[o].generated
            };
            if wake(a, b) || wake(b, a) {
                self.wake_logged = true;
                self.interactions.push(Interaction {
                    t: tc,
                    y: self.y_at(tc),
                    kind: InteractionKind::Wake,
                    left: l,
                    right: r,
                });
            }
        }
        self.kill(a);
        self.kill(b);
        let mut group = Vec::new();
        let mut last = before;
        for (ul, ur, kind) in fan_riemann(l, r, self.wp.delta_nu) {
            let id = self.new_node(p, tc, ul, ur, kind, generated);
            self.nodes[id].prev = last;
            if last == NIL {
                self.head = id;
            } else {
                self.nodes[last].next = id;
            }
            group.push(id);
            last = id;
        }
        if last == NIL {
            self.head = after;
        } else {
            self.nodes[last].next = after;
        }
        if after != NIL {
            self.nodes[after].prev = last;
        }
        if self.free() && self.y.yl == b {
            self.y.yl = last;
        }

        let touching = self.free() && (self.y_at(tc) - p).abs() <= self.tol_x;
        let y_right = touching && self.y.yl == last;
        let y_left = touching && self.after_y() == group.first().copied().unwrap_or(after);
        if glued || y_right || y_left {
            let pref = if y_right { group.len() } else { 0 };
            self.resolve(&group, before, p, tc, pref);
            let mut moved = group.clone();
            if before != NIL {
                moved.push(before);
            }
            if after != NIL {
                moved.push(after);
            }
            self.schedule_around(&moved, tc);
            return;
        }
        let mut lefts: Vec<Elem> = group.iter().map(|&id| Elem::Node(id)).collect();
        let anchor = group.first().copied().unwrap_or(after);
        if anchor != NIL {
            if let Some(l) = self.left_of(Elem::Node(anchor)) {
                lefts.push(l);
            }
        } else if before != NIL {
            lefts.push(Elem::Node(before));
        }
        if self.free() {
            lefts.push(Elem::Y);
        }
        for e in lefts {
            self.schedule(e, tc);
        }
    }

    fn vehicle_meets(&mut self, id: usize, tc: T, from_left: bool) {
        let p = self.y_at(tc);
        self.reanchor(id, tc, p);
        if !from_left {
            self.warnings.push(format!(
                "a front overtook the bottleneck from behind at t = {}",
                tc.to_f64_lossy()
            ));
        }
        let before = self.nodes[id].prev;
        self.resolve(&[id], before, p, tc, if from_left { 0 } else { 1 });
        self.schedule_around(&[id], tc);
    }

    /// Places the vehicle at `p` among the coincident fronts `group` (left
    /// to right, `before` being the node left of the group): it keeps a free
    /// slot `j` when `λ_j ≤ w(u_j) ≤ λ_{j+1}`, otherwise it travels with the
    /// front it cannot cross.
    fn resolve(&mut self, group: &[usize], before: usize, p: T, tc: T, pref: usize) {
        let k = group.len();
        let mut u = Vec::with_capacity(k + 1);
        u.push(if k == 0 {
            if before == NIL {
                self.left_state
            } else {
                self.nodes[before].right
            }
        } else {
            self.nodes[group[0]].left
        });
        u.extend(group.iter().map(|&id| self.nodes[id].right));
        let (w_max, phi0) = (self.params.w_max, self.phi0);
        let w = |r: T| w_max * (T::one() - r);
        let lam = |i: usize| phi0 * (T::one() - u[i - 1] - u[i]);
        for &id in group {
            self.reanchor(id, tc, p);
        }
        let was = self.y.mode;
        let old_state = self.state_at_vehicle();
        if let Mode::Glued(g) = was {
            if self.nodes[g].alive && !group.contains(&g) {
                let pos = self.pos(g, tc);
                self.reanchor(g, tc, pos);
            }
        }
        self.history.push((self.y.ta, self.y.ya, self.y.v));

        let slot = (0..=k)
            .filter(|&j| (j == 0 || lam(j) <= w(u[j])) && (j == k || w(u[j]) <= lam(j + 1)))
            .min_by_key(|&j| j.abs_diff(pref));
        self.knots.push((tc, p));
        self.y.ta = tc;
        self.y.ya = p;
        self.y.version += 1;
        match slot {
            Some(j) => {
                self.y.mode = Mode::Free;
                self.y.yl = if j == 0 { before } else { group[j - 1] };
                self.y.v = w(u[j]);
                let kind = match was {
                    Mode::Glued(_) => Some(InteractionKind::Released),
                    Mode::Free if j != pref => Some(if pref == 0 {
                        InteractionKind::Crossing
                    } else {
                        InteractionKind::Overtaken
                    }),
                    Mode::Free => None,
                };
                if let Some(kind) = kind {
                    let strong = u[0].max(u[k]) - u[0].min(u[k]) > self.wp.delta_nu;
                    if strong || kind == InteractionKind::Released {
                        self.interactions.push(Interaction {
                            t: tc,
                            y: p,
                            kind,
                            left: old_state,
                            right: u[j],
                        });
                    }
                }
            }
            None => {
                let i = (1..=k)
                    .find(|&i| w(u[i]) <= lam(i) && lam(i) <= w(u[i - 1]))
                    .unwrap_or_else(|| {
                        self.warnings.push(format!(
                            "no admissible vehicle placement at t = {}; kept on the nearest front",
                            tc.to_f64_lossy()
                        ));
                        pref.clamp(1, k.max(1))
                    });
                let g = group[i - 1];
                self.y.mode = Mode::Glued(g);
                self.y.yl = self.nodes[g].prev;
                self.y.v = self.phi0 * self.nodes[g].c;
                if was == Mode::Free {
                    self.interactions.push(Interaction {
                        t: tc,
                        y: p,
                        kind: InteractionKind::Glued,
                        left: u[i - 1],
                        right: u[i],
                    });
                }
            }
        }
    }

    fn finish(mut self) -> WindowOutcome<T> {
        let t1 = self.t1;
        let y = self.y_at(t1);
        self.knots.push((t1, y));
        let mut fronts = Vec::new();
        let mut id = self.head;
        let mut last = T::neg_infinity();
        while id != NIL {
            let n = &self.nodes[id];
            let pos = self.pos(id, t1).max(last);
            last = pos;
            fronts.push(Front {
                pos,
                left: n.left,
                right: n.right,
                kind: n.kind,
                generated: n.generated,
            });
            id = n.next;
        }
        WindowOutcome {
            fronts: FrontList {
                left_state: self.left_state,
                fronts,
            },
            y,
            knots: self.knots,
            events: self.events,
            interactions: self.interactions,
            warnings: self.warnings,
        }
    }
}
