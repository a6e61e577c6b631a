//! Gradient-sum reversion: exact recovery of each bin's encoded members
//! from the decrypted low region.
//!
//! A bin's low region is the integer sum of its members' magic numbers, so
//! a candidate member set is consistent iff its identifier digits sum to
//! the observed identifier integer and its per-supergroup random values sum
//! to the observed window contents. The search runs in two phases:
//!
//! 1. per-position member counts consistent with the identifier integer,
//!    by a carry digit recursion from the least significant position: at
//!    position p the count satisfies `m + c_in = digit_p + b * c_out`, so
//!    carries (b members at p looking like one at p+1) are handled exactly;
//!    per-window interval arithmetic over the candidates' random values
//!    prunes count vectors the windows can never pay for;
//! 2. member selection matching every window sum exactly, by
//!    meet-in-the-middle over the per-position combinations, falling back
//!    to bounded DFS when the option product is too large to halve.
//!
//! A bin is recovered only when exactly one member set survives; several
//! solutions (or an exhausted budget) mark it ambiguous, none mark it
//! unrecoverable — the signature of a carry that corrupted the cell.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::plan::{AssignmentTable, EncodingPlan, SampleCode, Slot};
use crate::sboost::HistogramLog;

/// Node budget for one cell's search; exceeding it gives up on the cell
/// deterministically.
pub const DEFAULT_SEARCH_BUDGET: u64 = 4_000_000;

const MAX_SIZE_VECTORS: usize = 512;
/// Half-product cap for meet-in-the-middle enumeration.
const MITM_CAP: f64 = (1u64 << 21) as f64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellOutcome {
    /// Exactly one member set explains the sums.
    Unique(Vec<usize>),
    /// Two or more member sets (or the search budget ran out).
    Ambiguous,
    /// No member set explains the sums: a carry corrupted the cell.
    NoSolution,
}

/// One identifier position's candidates with precomputed window-load
/// bounds per member count.
struct PosData<'a> {
    position: u64,
    cands: Vec<&'a SampleCode>,
    /// `load_min[m][s]` / `load_max[m][s]`: least/greatest total random
    /// mass m members of this position can put into window s.
    load_min: Vec<Vec<u64>>,
    load_max: Vec<Vec<u64>>,
}

/// Candidates of one slot, indexed by identifier position (ascending).
pub struct SlotIndex<'a> {
    k: usize,
    pos: Vec<PosData<'a>>,
    /// `future_max[j][s]`: the most positions j.. can contribute to window
    /// s at full occupancy.
    future_max: Vec<Vec<u64>>,
}

impl<'a> SlotIndex<'a> {
    pub fn build(table: &'a AssignmentTable, slot: Slot) -> Self {
        Self::build_filtered(table, slot, None, &BTreeSet::new())
    }

    /// Build the index restricted to `allowed` samples (when given) minus
    /// the banned ones (already committed to a different bin by another
    /// cell's unique solution).
    pub fn build_filtered(
        table: &'a AssignmentTable,
        slot: Slot,
        allowed: Option<&BTreeSet<usize>>,
        banned: &BTreeSet<usize>,
    ) -> Self {
        let k = table.plan.k as usize;
        let mut by_pos: HashMap<u64, Vec<&SampleCode>> = HashMap::new();
        for code in table.codes.iter().filter(|c| {
            c.slot == slot
                && !banned.contains(&c.sample)
                && allowed.is_none_or(|set| set.contains(&c.sample))
        }) {
            by_pos.entry(code.position).or_default().push(code);
        }
        let mut pos: Vec<PosData> = by_pos
            .into_iter()
            .map(|(position, mut cands)| {
                cands.sort_by_key(|c| c.sample);
                // Sorted randoms per supergroup for the load bounds.
                let mut per_s: Vec<Vec<u64>> = vec![Vec::new(); k];
                for c in &cands {
                    per_s[c.supergroup as usize].push(c.random);
                }
                for list in &mut per_s {
                    list.sort_unstable();
                }
                let total = cands.len();
                let mut all: Vec<u64> = cands.iter().map(|c| c.random).collect();
                all.sort_unstable();
                // One row per member count; k per-window entries plus the
                // total-mass dimension at index k.
                let mut load_min = vec![vec![0u64; k + 1]; total + 1];
                let mut load_max = vec![vec![0u64; k + 1]; total + 1];
                for m in 0..=total {
                    for s in 0..k {
                        let own = per_s[s].len();
                        let others: usize =
                            (0..k).filter(|&t| t != s).map(|t| per_s[t].len()).sum();
                        // At least m - others members must come from s.
                        let forced = m.saturating_sub(others).min(own);
                        load_min[m][s] = per_s[s][..forced].iter().sum();
                        let most = m.min(own);
                        load_max[m][s] = per_s[s][own - most..].iter().sum();
                    }
                    load_min[m][k] = all[..m].iter().sum();
                    load_max[m][k] = all[total - m..].iter().sum();
                }
                PosData { position, cands, load_min, load_max }
            })
            .collect();
        pos.sort_by_key(|p| p.position);
        let mut future_max = vec![vec![0u64; k + 1]; pos.len() + 1];
        for j in (0..pos.len()).rev() {
            let full = pos[j].cands.len();
            for s in 0..=k {
                future_max[j][s] = future_max[j + 1][s] + pos[j].load_max[full][s];
            }
        }
        Self { k, pos, future_max }
    }
}

struct CellPuzzle<'a, 'b> {
    plan: &'b EncodingPlan,
    index: &'b SlotIndex<'a>,
    windows: Vec<u64>,
    budget: u64,
    used: u64,
}

/// Reverse one low region against the slot's candidates. `count_cap` is
/// the bin's member count, which bounds how many encoded members any
/// solution may involve.
pub fn solve_low_region(
    low: &BigUint,
    count_cap: u64,
    plan: &EncodingPlan,
    index: &SlotIndex,
    budget: u64,
) -> CellOutcome {
    if low.is_zero() {
        return CellOutcome::Unique(Vec::new());
    }
    let id_mask = (BigUint::from(1u8) << plan.id_bits()) - 1u8;
    let id_value = low & id_mask;
    let window_mask = (1u128 << plan.geometry.window_bits) - 1;
    let windows: Vec<u64> = (0..plan.k)
        .map(|s| {
            let shifted = (low >> plan.window_offset(s)) & BigUint::from(u128::MAX);
            (shifted.to_u128().expect("masked to 128 bits") & window_mask) as u64
        })
        .collect();

    let mut puzzle = CellPuzzle { plan, index, windows, budget, used: 0 };
    let mut vectors = Vec::new();
    if !puzzle.size_vectors(&id_value, count_cap, &mut vectors) {
        return CellOutcome::Ambiguous;
    }
    if vectors.is_empty() {
        return CellOutcome::NoSolution;
    }

    let mut solutions: Vec<Vec<usize>> = Vec::new();
    for sizes in &vectors {
        match puzzle.members_for_sizes(sizes) {
            Some(mut found) => solutions.append(&mut found),
            None => return CellOutcome::Ambiguous,
        }
        if solutions.len() >= 2 {
            return CellOutcome::Ambiguous;
        }
    }
    match solutions.len() {
        0 => CellOutcome::NoSolution,
        1 => {
            let mut members = solutions.pop().expect("one solution");
            members.sort_unstable();
            CellOutcome::Unique(members)
        }
        _ => CellOutcome::Ambiguous,
    }
}

impl CellPuzzle<'_, '_> {
    fn spend(&mut self, nodes: u64) -> bool {
        self.used += nodes;
        self.used <= self.budget
    }

    /// Phase 1: all per-position member counts whose place-value sum equals
    /// the identifier integer, within the bin's member count and the
    /// windows' payable mass. Counts are found least-significant first via
    /// the base-b carry equation. Returns false when the budget blew.
    fn size_vectors(
        &mut self,
        id_value: &BigUint,
        count_cap: u64,
        out: &mut Vec<Vec<usize>>,
    ) -> bool {
        // Base-b digits of the identifier, least significant first.
        let base = BigUint::from(self.plan.b);
        let mut digits: Vec<u64> = Vec::new();
        let mut rest = id_value.clone();
        while !rest.is_zero() {
            digits.push((&rest % &base).to_u64().expect("digit < b"));
            rest /= &base;
        }

        struct Ctx<'x, 'a, 'b> {
            puzzle: &'x mut CellPuzzle<'a, 'b>,
            digits: Vec<u64>,
            count_cap: usize,
            /// Per-window targets with the total mass appended.
            targets: Vec<u64>,
            lo: Vec<u64>,
            hi: Vec<u64>,
        }
        // Walk candidate positions ascending; `digit_at` covers the gaps
        // (positions without candidates force m = 0).
        fn digit_at(digits: &[u64], p: u64) -> u64 {
            digits.get(p as usize).copied().unwrap_or(0)
        }
        /// Propagate the carry through candidate-less positions from
        /// `from` (exclusive) to `to` (exclusive); None when inconsistent.
        fn coast(digits: &[u64], b: u64, mut carry: u64, from: u64, to: u64) -> Option<u64> {
            for p in from + 1..to {
                let d = digit_at(digits, p);
                if carry % b != d % b || carry < d {
                    // m = 0 here, so the carry must reproduce the digit.
                    return None;
                }
                carry = (carry - d) / b;
            }
            Some(carry)
        }
        fn rec(
            ctx: &mut Ctx,
            j: usize,
            carry: u64,
            used: usize,
            sizes: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) -> bool {
            if !ctx.puzzle.spend(1) || out.len() >= MAX_SIZE_VECTORS {
                return false;
            }
            let k = ctx.puzzle.index.k;
            for s in 0..=k {
                if ctx.lo[s] > ctx.targets[s]
                    || ctx.hi[s] + ctx.puzzle.index.future_max[j][s] < ctx.targets[s]
                {
                    return true;
                }
            }
            if j == ctx.puzzle.index.pos.len() {
                // The coast after the last candidate position already
                // consumed every remaining digit.
                if carry == 0 {
                    out.push(sizes.clone());
                }
                return true;
            }
            let pos = &ctx.puzzle.index.pos[j];
            let d = digit_at(&ctx.digits, pos.position);
            let b = ctx.puzzle.plan.b;
            let cap = pos.cands.len().min(ctx.count_cap - used);
            // m + carry = d + b * c_out with m in [0, cap].
            let mut m = ((d + b - carry % b) % b) as usize;
            if (carry % b) == d % b && carry > d {
                // Even m = 0 cannot absorb an oversized carry unless the
                // subtraction stays non-negative; handled per m below.
            }
            while m <= cap {
                let total_in = m as u64 + carry;
                if total_in >= d && (total_in - d) % b == 0 {
                    let c_out = (total_in - d) / b;
                    // Advance to the next candidate position, coasting the
                    // carry through empty positions.
                    let next_p = ctx
                        .puzzle
                        .index
                        .pos
                        .get(j + 1)
                        .map_or(ctx.digits.len().max(pos.position as usize + 1) as u64, |n| {
                            n.position
                        });
                    if let Some(c_next) = coast(&ctx.digits, b, c_out, pos.position, next_p) {
                        for s in 0..=k {
                            ctx.lo[s] += pos.load_min[m][s];
                            ctx.hi[s] += pos.load_max[m][s];
                        }
                        sizes.push(m);
                        let ok = rec(ctx, j + 1, c_next, used + m, sizes, out);
                        sizes.pop();
                        for s in 0..=k {
                            ctx.lo[s] -= pos.load_min[m][s];
                            ctx.hi[s] -= pos.load_max[m][s];
                        }
                        if !ok {
                            return false;
                        }
                    }
                }
                m += b as usize;
            }
            true
        }

        if self.index.pos.is_empty() {
            return true; // nonzero identifier, no candidates: no solution
        }
        // Nothing below the first candidate position can be explained.
        let first = self.index.pos[0].position;
        if digits.iter().take(first as usize).any(|&d| d != 0) {
            return true;
        }
        let k = self.k();
        let count_cap = count_cap.min(usize::MAX as u64) as usize;
        let mut targets = self.windows.clone();
        targets.push(self.windows.iter().sum());
        let mut ctx =
            Ctx { puzzle: self, digits, count_cap, targets, lo: vec![0; k + 1], hi: vec![0; k + 1] };
        let mut sizes = Vec::new();
        rec(&mut ctx, 0, 0, 0, &mut sizes, out)
    }

    fn k(&self) -> usize {
        self.index.k
    }

    /// Phase 2: member sets of the given per-position sizes matching every
    /// window sum. Returns up to two solutions, or None on budget blow.
    fn members_for_sizes(&mut self, sizes: &[usize]) -> Option<Vec<Vec<usize>>> {
        let k = self.k();
        // Option lists: per active position, every size-m combination with
        // its per-window random contribution.
        let mut options: Vec<Vec<(Vec<usize>, Vec<u64>)>> = Vec::new();
        for (j, &m) in sizes.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let cands = &self.index.pos[j].cands;
            let mut opts = Vec::new();
            let mut pick = Vec::new();
            combinations(cands, m, 0, &mut pick, &mut |chosen| {
                let mut w = vec![0u64; k];
                let mut members = Vec::with_capacity(m);
                for code in chosen {
                    w[code.supergroup as usize] += code.random;
                    members.push(code.sample);
                }
                opts.push((members, w));
            });
            options.push(opts);
        }
        if options.is_empty() {
            // All sizes zero: the empty set, valid iff the windows are too.
            return Some(if self.windows.iter().all(|&w| w == 0) {
                vec![Vec::new()]
            } else {
                Vec::new()
            });
        }

        // Split the positions into halves of balanced option products.
        let total_product: f64 = options.iter().map(|o| o.len() as f64).product();
        let mut split = options.len();
        let mut left_product = 1.0f64;
        for (i, opts) in options.iter().enumerate() {
            if left_product * opts.len() as f64 > total_product.sqrt() * 2.0 {
                split = i;
                break;
            }
            left_product *= opts.len() as f64;
        }
        let split = split.clamp(1, options.len());
        let left_count: f64 = options[..split].iter().map(|o| o.len() as f64).product();
        let right_count: f64 = options[split..].iter().map(|o| o.len() as f64).product();
        if left_count <= MITM_CAP && right_count <= MITM_CAP {
            self.meet_in_middle(&options, split)
        } else {
            self.bounded_dfs(&options)
        }
    }

    fn meet_in_middle(
        &mut self,
        options: &[Vec<(Vec<usize>, Vec<u64>)>],
        split: usize,
    ) -> Option<Vec<Vec<usize>>> {
        let k = self.k();
        // Enumerate the left half into a map keyed by its window vector.
        let mut left: HashMap<Vec<u64>, (u64, Vec<Vec<usize>>)> = HashMap::new();
        let mut ok = true;
        enumerate_product(&options[..split], k, &mut |members, w| {
            if !self.spend(1) {
                ok = false;
                return false;
            }
            if w.iter().zip(&self.windows).any(|(a, b)| a > b) {
                return true;
            }
            let entry = left.entry(w.to_vec()).or_insert_with(|| (0, Vec::new()));
            entry.0 += 1;
            if entry.1.len() < 2 {
                entry.1.push(members.to_vec());
            }
            true
        });
        if !ok {
            return None;
        }
        let mut solutions: Vec<Vec<usize>> = Vec::new();
        let mut count = 0u64;
        let mut complement = vec![0u64; k];
        enumerate_product(&options[split..], k, &mut |members, w| {
            if !self.spend(1) {
                ok = false;
                return false;
            }
            for s in 0..k {
                let Some(c) = self.windows[s].checked_sub(w[s]) else {
                    return true;
                };
                complement[s] = c;
            }
            if let Some((n, witnesses)) = left.get(&complement) {
                count += n;
                for witness in witnesses {
                    if solutions.len() < 2 {
                        let mut full = witness.clone();
                        full.extend_from_slice(members);
                        solutions.push(full);
                    }
                }
            }
            count < 2
        });
        if !ok {
            return None;
        }
        solutions.truncate(count.min(2) as usize);
        Some(solutions)
    }

    fn bounded_dfs(&mut self, options: &[Vec<(Vec<usize>, Vec<u64>)>]) -> Option<Vec<Vec<usize>>> {
        let k = self.k();
        // Suffix maxima per window for pruning.
        let mut suffix = vec![vec![0u64; k]; options.len() + 1];
        for j in (0..options.len()).rev() {
            for s in 0..k {
                let best = options[j].iter().map(|(_, w)| w[s]).max().unwrap_or(0);
                suffix[j][s] = suffix[j + 1][s] + best;
            }
        }
        struct Dfs<'x, 'a, 'b> {
            puzzle: &'x mut CellPuzzle<'a, 'b>,
            options: &'x [Vec<(Vec<usize>, Vec<u64>)>],
            suffix: &'x [Vec<u64>],
            solutions: Vec<Vec<usize>>,
            blew: bool,
        }
        impl Dfs<'_, '_, '_> {
            fn run(&mut self, j: usize, partial: &mut Vec<u64>, chosen: &mut Vec<usize>) {
                if self.blew || self.solutions.len() >= 2 {
                    return;
                }
                if !self.puzzle.spend(1) {
                    self.blew = true;
                    return;
                }
                if j == self.options.len() {
                    if partial == &self.puzzle.windows {
                        self.solutions.push(chosen.clone());
                    }
                    return;
                }
                for s in 0..partial.len() {
                    if partial[s] + self.suffix[j][s] < self.puzzle.windows[s] {
                        return;
                    }
                }
                for (members, w) in &self.options[j] {
                    if w.iter()
                        .zip(partial.iter())
                        .zip(&self.puzzle.windows)
                        .any(|((add, have), target)| have + add > *target)
                    {
                        continue;
                    }
                    for s in 0..partial.len() {
                        partial[s] += w[s];
                    }
                    let before = chosen.len();
                    chosen.extend_from_slice(members);
                    self.run(j + 1, partial, chosen);
                    chosen.truncate(before);
                    for s in 0..partial.len() {
                        partial[s] -= w[s];
                    }
                }
            }
        }
        let mut dfs = Dfs { puzzle: self, options, suffix: &suffix, solutions: Vec::new(), blew: false };
        let mut partial = vec![0u64; k];
        let mut chosen = Vec::new();
        dfs.run(0, &mut partial, &mut chosen);
        if dfs.blew {
            None
        } else {
            Some(dfs.solutions)
        }
    }
}

fn combinations<'a>(
    cands: &[&'a SampleCode],
    m: usize,
    from: usize,
    pick: &mut Vec<&'a SampleCode>,
    emit: &mut dyn FnMut(&[&'a SampleCode]),
) {
    if pick.len() == m {
        emit(pick);
        return;
    }
    let need = m - pick.len();
    for i in from..cands.len() {
        if cands.len() - i < need {
            break;
        }
        pick.push(cands[i]);
        combinations(cands, m, i + 1, pick, emit);
        pick.pop();
    }
}

/// Walk the cartesian product of the option lists; the callback returns
/// false to stop early.
fn enumerate_product(
    options: &[Vec<(Vec<usize>, Vec<u64>)>],
    k: usize,
    visit: &mut dyn FnMut(&[usize], &[u64]) -> bool,
) {
    fn rec(
        options: &[Vec<(Vec<usize>, Vec<u64>)>],
        j: usize,
        members: &mut Vec<usize>,
        w: &mut Vec<u64>,
        visit: &mut dyn FnMut(&[usize], &[u64]) -> bool,
    ) -> bool {
        if j == options.len() {
            return visit(members, w);
        }
        for (m, contrib) in &options[j] {
            let before = members.len();
            members.extend_from_slice(m);
            for (acc, c) in w.iter_mut().zip(contrib) {
                *acc += c;
            }
            let keep_going = rec(options, j + 1, members, w, visit);
            members.truncate(before);
            for (acc, c) in w.iter_mut().zip(contrib) {
                *acc -= c;
            }
            if !keep_going {
                return false;
            }
        }
        true
    }
    let mut members = Vec::new();
    let mut w = vec![0u64; k];
    rec(options, 0, &mut members, &mut w, visit);
}

/// Recovery state of one (feature, bin) pair, merged over every node
/// histogram that touched the bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinRecovery {
    pub bin: usize,
    pub samples: BTreeSet<usize>,
    pub cells_unique: usize,
    pub cells_ambiguous: usize,
    pub cells_unrecoverable: usize,
}

impl BinRecovery {
    /// Every cell that touched this bin resolved uniquely.
    pub fn confident(&self) -> bool {
        self.cells_ambiguous == 0 && self.cells_unrecoverable == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRecovery {
    pub feature: usize,
    pub bins: Vec<BinRecovery>,
    /// Samples recovered into more than one bin and therefore dropped.
    pub conflicts: usize,
}

impl FeatureRecovery {
    /// The recovered bin of a sample, if any.
    pub fn bin_of(&self, sample: usize) -> Option<usize> {
        self.bins.iter().find(|b| b.samples.contains(&sample)).map(|b| b.bin)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredBins {
    pub features: Vec<FeatureRecovery>,
}

/// Reverse every bin of one tree's histograms. Both gradient slots of a
/// cell are independent puzzles; their recoveries merge per (feature, bin).
///
/// Cells are re-solved iteratively: every sample a uniquely solved cell
/// commits to a bin is banned from every other bin of the same feature,
/// which collapses carry readings in the harder cells. The deep, small
/// node histograms usually resolve first and pin most samples.
pub fn reverse_sums(
    log: &HistogramLog,
    table: &AssignmentTable,
    tree: usize,
    budget: u64,
) -> RecoveredBins {
    const MAX_PASSES: usize = 6;

    struct Cell<'l> {
        feature: usize,
        bin: usize,
        slot: Slot,
        low: &'l BigUint,
        count: u64,
        /// The histogram node's sample set: candidates live inside it.
        node_samples: &'l [usize],
        outcome: Option<CellOutcome>,
    }
    let mut cells: Vec<Cell> = Vec::new();
    let mut feature_count = 0usize;
    for node in log.nodes.iter().filter(|n| n.tree == tree) {
        feature_count = feature_count.max(node.feature + 1);
        for cell in &node.cells {
            for (slot, low) in [(Slot::First, &cell.g_low), (Slot::Second, &cell.h_low)] {
                cells.push(Cell {
                    feature: node.feature,
                    bin: cell.bin,
                    slot,
                    low,
                    count: cell.count,
                    node_samples: &node.samples,
                    outcome: None,
                });
            }
        }
    }
    // Solve small candidate sets first so their commitments prune the rest.
    cells.sort_by_key(|c| (c.feature, c.node_samples.len(), c.bin, c.slot as usize));

    // Committed sample -> bin assignments, per feature.
    let mut committed: Vec<HashMap<usize, usize>> = vec![HashMap::new(); feature_count];
    for _pass in 0..MAX_PASSES {
        let mut progress = false;
        for feature in 0..feature_count {
            // Banned sets per bin: everything committed to some other bin.
            let mut progress_feature = true;
            while progress_feature {
                progress_feature = false;
                for cell in cells.iter_mut().filter(|c| {
                    c.feature == feature && !matches!(c.outcome, Some(CellOutcome::Unique(_)))
                }) {
                    let banned: BTreeSet<usize> = committed[feature]
                        .iter()
                        .filter(|(_, &bin)| bin != cell.bin)
                        .map(|(&sample, _)| sample)
                        .collect();
                    let allowed: BTreeSet<usize> =
                        cell.node_samples.iter().copied().collect();
                    let index =
                        SlotIndex::build_filtered(table, cell.slot, Some(&allowed), &banned);
                    let outcome =
                        solve_low_region(cell.low, cell.count, &table.plan, &index, budget);
                    if let CellOutcome::Unique(members) = &outcome {
                        for &m in members {
                            committed[feature].entry(m).or_insert(cell.bin);
                        }
                        progress = true;
                        progress_feature = true;
                    }
                    cell.outcome = Some(outcome);
                }
            }
        }
        if !progress {
            break;
        }
    }

    let mut features: Vec<FeatureRecovery> = (0..feature_count)
        .map(|feature| FeatureRecovery { feature, bins: Vec::new(), conflicts: 0 })
        .collect();
    for cell in &cells {
        let recovery = &mut features[cell.feature];
        while recovery.bins.len() <= cell.bin {
            recovery.bins.push(BinRecovery {
                bin: recovery.bins.len(),
                samples: BTreeSet::new(),
                cells_unique: 0,
                cells_ambiguous: 0,
                cells_unrecoverable: 0,
            });
        }
        let target = &mut recovery.bins[cell.bin];
        match cell.outcome.as_ref().expect("every cell was attempted") {
            CellOutcome::Unique(members) => {
                target.cells_unique += 1;
                target.samples.extend(members.iter().copied());
            }
            CellOutcome::Ambiguous => target.cells_ambiguous += 1,
            CellOutcome::NoSolution => target.cells_unrecoverable += 1,
        }
    }

    // A sample recovered into two bins of one feature is evidence of a
    // spurious unique solution; drop it everywhere.
    for recovery in &mut features {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut dupes: BTreeSet<usize> = BTreeSet::new();
        for bin in &recovery.bins {
            for &s in &bin.samples {
                if let Some(prev) = seen.insert(s, bin.bin) {
                    if prev != bin.bin {
                        dupes.insert(s);
                    }
                }
            }
        }
        recovery.conflicts = dupes.len();
        if !dupes.is_empty() {
            for bin in &mut recovery.bins {
                bin.samples.retain(|s| !dupes.contains(s));
            }
        }
    }

    RecoveredBins { features }
}
