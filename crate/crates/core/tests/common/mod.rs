//! Independent oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use lrfhss_sim::acrda::{BufferedPacket, Window};
use lrfhss_sim::engine::{derive_stream, RandomStream};
use lrfhss_sim::protocol::{FragmentKind, PacketId};

/// One fragment as read back from a trace CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub packet: u64,
    pub index: u16,
    pub node: u32,
    pub kind: String,
    pub channel: u16,
    pub start: u64,
    pub end: u64,
    pub status: String,
}

pub fn parse_trace_csv(text: &str) -> Vec<TraceRow> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).expect(name);
    let (p, i, n, k, c, s, e, st) = (
        col("packet_id"),
        col("index"),
        col("node_id"),
        col("kind"),
        col("channel"),
        col("start"),
        col("end"),
        col("status"),
    );
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            TraceRow {
                packet: f[p].parse().unwrap(),
                index: f[i].parse().unwrap(),
                node: f[n].parse().unwrap(),
                kind: f[k].to_string(),
                channel: f[c].parse().unwrap(),
                start: f[s].parse().unwrap(),
                end: f[e].parse().unwrap(),
                status: f[st].to_string(),
            }
        })
        .collect()
}

pub type FragKey = (u64, u16);

/// All-pairs sweep: two fragments collide iff they share a channel and their
/// half-open intervals intersect.
pub fn collision_sweep(rows: &[TraceRow]) -> BTreeMap<FragKey, BTreeSet<FragKey>> {
    let mut out: BTreeMap<FragKey, BTreeSet<FragKey>> =
        rows.iter().map(|r| ((r.packet, r.index), BTreeSet::new())).collect();
    for (a_i, a) in rows.iter().enumerate() {
        for b in &rows[a_i + 1..] {
            if a.channel == b.channel && a.start < b.end && b.start < a.end {
                out.get_mut(&(a.packet, a.index)).unwrap().insert((b.packet, b.index));
                out.get_mut(&(b.packet, b.index)).unwrap().insert((a.packet, a.index));
            }
        }
    }
    out
}

/// Two-sample Kolmogorov-Smirnov statistic for integer samples, with ties
/// handled by evaluating both ECDFs after each distinct value.
pub fn ks_statistic(a: &[u64], b: &[u64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Explicit step-by-step walk of the two-state chain. Returns the number of
/// steps between consecutive State-1 visits, starting from State 1.
pub fn markov_step_walk(p: f64, q: f64, samples: usize, rng: &mut RandomStream) -> Vec<u64> {
    let mut gaps = Vec::with_capacity(samples);
    let mut state1 = true;
    let mut steps = 0u64;
    while gaps.len() < samples {
        let u = rng.unit();
        state1 = if state1 { u >= q } else { u >= p };
        steps += 1;
        if state1 {
            gaps.push(steps);
            steps = 0;
        }
    }
    gaps
}

fn decodable(p: &BufferedPacket, decoded: &BTreeSet<PacketId>) -> bool {
    let ok = |f: &&lrfhss_sim::acrda::BufferedFragment| f.interferers.iter().all(|i| decoded.contains(i));
    let headers = p
        .fragments
        .iter()
        .filter(|f| f.kind == FragmentKind::Header)
        .filter(ok)
        .count();
    let payload = p
        .fragments
        .iter()
        .filter(|f| f.kind == FragmentKind::Payload)
        .filter(ok)
        .count();
    headers >= 1 && payload as u32 >= p.threshold
}

/// Explores every decode order (memoized on the decoded subset) and returns
/// the set of maximal decoded sets reached. The closure is order independent
/// iff exactly one set comes back.
pub fn brute_force_decode_orders(
    packets: &[BufferedPacket],
    window: Window,
    already: &BTreeSet<PacketId>,
) -> BTreeSet<BTreeSet<PacketId>> {
    let eligible: Vec<&BufferedPacket> = packets
        .iter()
        .filter(|p| window.start <= p.start && p.end <= window.end && !already.contains(&p.id))
        .collect();
    let mut terminals = BTreeSet::new();
    let mut visited: HashSet<u64> = HashSet::new();
    let mut stack = vec![0u64];
    while let Some(mask) = stack.pop() {
        if !visited.insert(mask) {
            continue;
        }
        let decoded: BTreeSet<PacketId> = already
            .iter()
            .copied()
            .chain(
                eligible
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, p)| p.id),
            )
            .collect();
        let mut extended = false;
        for (i, p) in eligible.iter().enumerate() {
            if mask >> i & 1 == 0 && decodable(p, &decoded) {
                stack.push(mask | 1 << i);
                extended = true;
            }
        }
        if !extended {
            terminals.insert(
                eligible
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, p)| p.id)
                    .collect(),
            );
        }
    }
    terminals
}

/// A random buffer of up to `max_packets` packets with random collision
/// structure, plus some interferers that are never decodable.
pub fn random_buffer(seed: u64, max_packets: u32) -> Vec<BufferedPacket> {
    use lrfhss_sim::acrda::BufferedFragment;
    use lrfhss_sim::engine::SimTime;

    let mut rng = derive_stream(seed, 0xB0FF);
    let n = 1 + rng.below(max_packets);
    (0..n)
        .map(|id| {
            let headers = 1 + rng.below(3);
            let payload = 1 + rng.below(6);
            let threshold = 1 + rng.below(payload);
            let start = u64::from(rng.below(10));
            let fragments = (0..headers + payload)
                .map(|k| {
                    let mut interferers = Vec::new();
                    let hits = rng.below(3);
                    for _ in 0..hits {
                        // Ids >= 100 stand for packets outside the buffer.
                        let other = if rng.below(5) == 0 {
                            100 + u64::from(rng.below(3))
                        } else {
                            u64::from(rng.below(n))
                        };
                        if other != u64::from(id) {
                            interferers.push(PacketId(other));
                        }
                    }
                    interferers.sort_unstable();
                    interferers.dedup();
                    BufferedFragment {
                        kind: if k < headers {
                            FragmentKind::Header
                        } else {
                            FragmentKind::Payload
                        },
                        channel: 0,
                        start: SimTime(start),
                        end: SimTime(start + 10),
                        interferers,
                    }
                })
                .collect();
            BufferedPacket {
                id: PacketId(u64::from(id)),
                node_id: id,
                start: SimTime(start),
                end: SimTime(start + 10),
                threshold,
                fragments,
            }
        })
        .collect()
}

/// Pooled standard deviation of two equally sized groups.
pub fn pooled_sd(sd_a: f64, sd_b: f64) -> f64 {
    ((sd_a * sd_a + sd_b * sd_b) / 2.0).sqrt()
}
