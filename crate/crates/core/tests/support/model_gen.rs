//! Random valid OVM models for round-trip properties.

use qkdvm_core::fragment::*;
use qkdvm_core::ovm::{Cardinality, ConstraintDependency, ConstraintKind, Presence};
use qkdvm_core::{Ident, OvmModel, Variant, VariationPoint};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Gen {
    rng: ChaCha8Rng,
    next: usize,
}

const ID_CHARS: &[u8] = b"abcXYZ019_-";
const LABEL_CHARS: &[char] = &[
    'a', 'Z', ' ', '"', '\\', '\n', '\t', 'é', '→', '#', '{', '}', '=', '9',
];

impl Gen {
    fn bool(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn upto(&mut self, n: usize) -> usize {
        self.rng.random_range(0..=n)
    }

    fn ident(&mut self) -> Ident {
        let len = self.rng.random_range(1..5);
        let mut s: String = (0..len)
            .map(|_| *ID_CHARS.choose(&mut self.rng).unwrap() as char)
            .collect();
        // Unique: the digits after the last `_` are the counter.
        self.next += 1;
        s.push('_');
        s.push_str(&self.next.to_string());
        Ident::new(s)
    }

    fn label(&mut self) -> String {
        let len = self.upto(6);
        (0..len)
            .map(|_| *LABEL_CHARS.choose(&mut self.rng).unwrap())
            .collect()
    }

    fn opt_label(&mut self) -> Option<String> {
        self.bool(0.5).then(|| self.label())
    }

    fn process(&mut self) -> ProcessFragment {
        let lanes: Vec<Ident> = (0..self.rng.random_range(1..4))
            .map(|_| self.ident())
            .collect();
        let mut nodes = vec![ProcessNode {
            id: self.ident(),
            kind: NodeKind::Initial,
            label: self.opt_label(),
            lane: None,
        }];
        let mut edges: Vec<ControlEdge> = Vec::new();
        for _ in 0..self.upto(5) {
            let kind = *[NodeKind::Action, NodeKind::Decision, NodeKind::Final]
                .choose(&mut self.rng)
                .unwrap();
            let node = ProcessNode {
                id: self.ident(),
                kind,
                label: if kind == NodeKind::Action {
                    Some(self.label())
                } else {
                    self.opt_label()
                },
                lane: if kind == NodeKind::Action || self.bool(0.3) {
                    Some(lanes.choose(&mut self.rng).unwrap().clone())
                } else {
                    None
                },
            };
            let parent = nodes.choose(&mut self.rng).unwrap();
            let guarded = parent.kind == NodeKind::Decision || self.bool(0.2);
            edges.push(ControlEdge {
                from: parent.id.clone(),
                to: node.id.clone(),
                guard: guarded.then(|| self.label()),
            });
            nodes.push(node);
        }
        for d in nodes.iter().filter(|n| n.kind == NodeKind::Decision) {
            while edges.iter().filter(|e| e.from == d.id).count() < 2 {
                let to = nodes.choose(&mut self.rng).unwrap().id.clone();
                edges.push(ControlEdge {
                    from: d.id.clone(),
                    to,
                    guard: Some(self.label()),
                });
            }
        }
        ProcessFragment {
            id: self.ident(),
            protocol: self.bool(0.5).then(|| {
                *[ProtocolKind::Bb84, ProtocolKind::Mdi, ProtocolKind::E91]
                    .choose(&mut self.rng)
                    .unwrap()
            }),
            lanes,
            nodes,
            edges,
        }
    }

    fn interaction(&mut self) -> InteractionFragment {
        let roles = [
            None,
            Some(LifelineRole::Sender),
            Some(LifelineRole::Receiver),
            Some(LifelineRole::Repeater),
            Some(LifelineRole::Medium),
        ];
        let lifelines: Vec<Lifeline> = (0..self.rng.random_range(1..5))
            .map(|_| Lifeline {
                id: self.ident(),
                role: *roles.choose(&mut self.rng).unwrap(),
            })
            .collect();
        let messages = (0..self.upto(5))
            .map(|_| Message {
                from: lifelines.choose(&mut self.rng).unwrap().id.clone(),
                to: lifelines.choose(&mut self.rng).unwrap().id.clone(),
                label: self.label(),
                channel: if self.bool(0.5) {
                    ChannelKind::Quantum
                } else {
                    ChannelKind::Classical
                },
            })
            .collect();
        let applies = match self.upto(3) {
            0 => vec![MediumKind::Fiber],
            1 => vec![MediumKind::FreeSpace, MediumKind::Fiber],
            _ => vec![],
        };
        InteractionFragment {
            id: self.ident(),
            applies,
            lifelines,
            messages,
        }
    }

    fn structure(&mut self) -> StructureFragment {
        let mut blocks: Vec<Block> = Vec::new();
        let mut containment = Vec::new();
        for _ in 0..self.upto(5) {
            let role = match self.upto(5) {
                0 => Some(BlockRole::Endpoint),
                1 => Some(BlockRole::Path),
                2 => Some(BlockRole::Repeater),
                3 => Some(BlockRole::Link {
                    medium: if self.bool(0.5) {
                        MediumKind::Fiber
                    } else {
                        MediumKind::FreeSpace
                    },
                    length_km: self
                        .bool(0.5)
                        .then(|| self.rng.random_range(0..100_000) as f64 / 100.0),
                }),
                _ => None,
            };
            let b = Block {
                id: self.ident(),
                label: self.opt_label(),
                role,
            };
            if !blocks.is_empty() && self.bool(0.6) {
                let parent = blocks.choose(&mut self.rng).unwrap().id.clone();
                containment.push(Containment {
                    parent,
                    child: b.id.clone(),
                });
            }
            blocks.push(b);
        }
        let mut ports = Vec::new();
        for b in &blocks {
            for _ in 0..self.upto(2) {
                ports.push(Port {
                    block: b.id.clone(),
                    id: self.ident(),
                    channel: if self.bool(0.5) {
                        ChannelKind::Quantum
                    } else {
                        ChannelKind::Classical
                    },
                    direction: *[Direction::In, Direction::Out, Direction::Inout]
                        .choose(&mut self.rng)
                        .unwrap(),
                });
            }
        }
        StructureFragment {
            id: self.ident(),
            blocks,
            containment,
            ports,
        }
    }

    fn fragment(&mut self, kind: ViewKind) -> ViewFragment {
        match kind {
            ViewKind::Process => ViewFragment::Process(self.process()),
            ViewKind::Interaction => ViewFragment::Interaction(self.interaction()),
            ViewKind::Structure => ViewFragment::Structure(self.structure()),
        }
    }

    fn model(&mut self) -> OvmModel {
        let mut m = OvmModel::new(self.ident().as_str());
        let kinds = [
            ViewKind::Process,
            ViewKind::Interaction,
            ViewKind::Structure,
        ];
        for _ in 0..self.upto(3) {
            let k = *kinds.choose(&mut self.rng).unwrap();
            let f = self.fragment(k);
            m.fragments.push(f);
        }
        for _ in 0..self.upto(4) {
            let kind = *kinds.choose(&mut self.rng).unwrap();
            let n = self.rng.random_range(1..4);
            let mut variants = Vec::new();
            for _ in 0..n {
                let existing: Vec<Ident> = m
                    .fragments
                    .iter()
                    .filter(|f| f.kind() == kind)
                    .map(|f| f.id().clone())
                    .collect();
                let fragment = if existing.is_empty() || self.bool(0.3) {
                    let f = self.fragment(kind);
                    let id = f.id().clone();
                    m.fragments.push(f);
                    id
                } else {
                    existing.choose(&mut self.rng).unwrap().clone()
                };
                variants.push(Variant {
                    id: self.ident(),
                    label: self.label(),
                    fragment,
                    opens: vec![],
                });
            }
            let max = self.rng.random_range(1..=n as u32);
            let min = self.rng.random_range(1..=max);
            let vp = VariationPoint {
                id: self.ident(),
                label: self.label(),
                presence: if self.bool(0.3) {
                    Presence::Optional
                } else {
                    Presence::Mandatory
                },
                cardinality: Cardinality::new(min, max),
                view_kind: kind,
                variants,
            };
            // Open the new VP from a variant of an earlier one: keeps a forest.
            if !m.variation_points.is_empty() && self.bool(0.5) {
                let i = self.rng.random_range(0..m.variation_points.len());
                let vs = &mut m.variation_points[i].variants;
                let j = self.rng.random_range(0..vs.len());
                vs[j].opens.push(vp.id.clone());
            }
            m.variation_points.push(vp);
        }
        let variant_ids: Vec<Ident> = m.variants().map(|(_, v)| v.id.clone()).collect();
        let targets: Vec<Ident> = variant_ids
            .iter()
            .cloned()
            .chain(m.variation_points.iter().map(|vp| vp.id.clone()))
            .collect();
        if !variant_ids.is_empty() {
            for _ in 0..self.upto(3) {
                let from = variant_ids.choose(&mut self.rng).unwrap().clone();
                let to = targets.choose(&mut self.rng).unwrap().clone();
                if from == to {
                    continue;
                }
                m.constraints.push(ConstraintDependency {
                    kind: if self.bool(0.5) {
                        ConstraintKind::Requires
                    } else {
                        ConstraintKind::Excludes
                    },
                    from,
                    to,
                });
            }
        }
        m
    }
}

pub fn random_model(seed: u64) -> OvmModel {
    Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        next: 0,
    }
    .model()
}
