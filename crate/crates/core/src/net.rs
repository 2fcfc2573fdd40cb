//! Timed transition Petri net with resources, built from an RCPSP instance.
//!
//! Layout of the place vector: the source place first, then one place per
//! precedence arc (in arc order), then the sink place, then one place per
//! resource type. There is exactly one transition per activity and transition
//! ids coincide with activity ids.

use std::fmt::Write as _;

use crate::instance::{ActivityId, InstanceError, RcpspInstance};

pub type PlaceId = usize;
pub type TransitionId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceKind {
    Source,
    Sink,
    Precedence { from: ActivityId, to: ActivityId },
    Resource(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub id: PlaceId,
    pub kind: PlaceKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: TransitionId,
    pub activity: ActivityId,
    pub duration: u32,
    /// `(place, weight)` arcs consumed on firing; weights are always positive.
    pub inputs: Vec<(PlaceId, u32)>,
    pub outputs: Vec<(PlaceId, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TtpnrNet {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    initial_marking: Vec<u32>,
    capacities: Vec<u32>,
    source: PlaceId,
    sink: PlaceId,
    resource_base: PlaceId,
    resource_users: Vec<Vec<(TransitionId, u32)>>,
}

impl TtpnrNet {
    /// Builds the net for a valid, dummy-closed instance.
    pub fn build(inst: &RcpspInstance) -> Result<Self, InstanceError> {
        inst.validate().map_err(InstanceError::Invalid)?;
        Ok(Self::build_unchecked(inst))
    }

    /// Builds the net without validating the instance first. A transition
    /// whose demand exceeds its resource capacity can never be enabled, which
    /// is how starved nets are produced for testing.
    pub fn build_unchecked(inst: &RcpspInstance) -> Self {
        let n = inst.num_activities();
        let k = inst.num_resources();

        let mut places = vec![Place {
            id: 0,
            kind: PlaceKind::Source,
        }];
        let mut transitions: Vec<Transition> = (0..n)
            .map(|j| Transition {
                id: j,
                activity: j,
                duration: inst.duration(j),
                inputs: Vec::new(),
                outputs: Vec::new(),
            })
            .collect();
        transitions[0].inputs.push((0, 1));

        for &(i, j) in inst.precedence() {
            if i >= n || j >= n {
                continue;
            }
            let p = places.len();
            places.push(Place {
                id: p,
                kind: PlaceKind::Precedence { from: i, to: j },
            });
            transitions[i].outputs.push((p, 1));
            transitions[j].inputs.push((p, 1));
        }

        let sink = places.len();
        places.push(Place {
            id: sink,
            kind: PlaceKind::Sink,
        });
        transitions[n - 1].outputs.push((sink, 1));

        let resource_base = places.len();
        for r in 0..k {
            places.push(Place {
                id: resource_base + r,
                kind: PlaceKind::Resource(r),
            });
        }
        // Zero-duration activities occupy no capacity, so they get no resource arcs.
        for t in transitions.iter_mut().filter(|t| t.duration > 0) {
            for r in 0..k {
                let u = inst.demand(t.activity, r);
                if u > 0 {
                    t.inputs.push((resource_base + r, u));
                    t.outputs.push((resource_base + r, u));
                }
            }
        }

        let mut resource_users = vec![Vec::new(); k];
        for t in &transitions {
            for &(p, w) in &t.inputs {
                if p >= resource_base {
                    resource_users[p - resource_base].push((t.id, w));
                }
            }
        }

        let mut initial_marking = vec![0; places.len()];
        initial_marking[0] = 1;
        for (r, &c) in inst.capacities().iter().enumerate() {
            initial_marking[resource_base + r] = c;
        }

        Self {
            places,
            transitions,
            initial_marking,
            capacities: inst.capacities().to_vec(),
            source: 0,
            sink,
            resource_base,
            resource_users,
        }
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn place(&self, p: PlaceId) -> &Place {
        &self.places[p]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t]
    }

    pub fn num_activities(&self) -> usize {
        self.transitions.len()
    }

    /// Token counts of M0; every initial token has delay 0.
    pub fn initial_marking(&self) -> &[u32] {
        &self.initial_marking
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn source_place(&self) -> PlaceId {
        self.source
    }

    pub fn sink_place(&self) -> PlaceId {
        self.sink
    }

    pub fn resource_place(&self, r: usize) -> PlaceId {
        self.resource_base + r
    }

    /// Transitions holding tokens of resource `r` while executing, with weights.
    pub fn resource_users(&self, r: usize) -> &[(TransitionId, u32)] {
        &self.resource_users[r]
    }

    pub fn num_resources(&self) -> usize {
        self.capacities.len()
    }

    pub fn start_transition(&self) -> TransitionId {
        0
    }

    pub fn finish_transition(&self) -> TransitionId {
        self.transitions.len() - 1
    }

    /// Graphviz rendering of the net structure with M0 token counts.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph ttpnr {\n  rankdir=LR;\n");
        for p in &self.places {
            let label = match p.kind {
                PlaceKind::Source => "source".to_string(),
                PlaceKind::Sink => "sink".to_string(),
                PlaceKind::Precedence { from, to } => format!("p_{from}_{to}"),
                PlaceKind::Resource(r) => format!("r{r}"),
            };
            let m0 = self.initial_marking[p.id];
            let tokens = if m0 > 0 {
                format!(" ({m0})")
            } else {
                String::new()
            };
            let _ = writeln!(s, "  p{} [shape=circle,label=\"{label}{tokens}\"];", p.id);
        }
        for t in &self.transitions {
            let _ = writeln!(
                s,
                "  t{} [shape=box,label=\"{} / {}\"];",
                t.id, t.activity, t.duration
            );
            for &(p, w) in &t.inputs {
                let _ = writeln!(s, "  p{p} -> t{}{};", t.id, weight_label(w));
            }
            for &(p, w) in &t.outputs {
                let _ = writeln!(s, "  t{} -> p{p}{};", t.id, weight_label(w));
            }
        }
        s.push_str("}\n");
        s
    }
}

fn weight_label(w: u32) -> String {
    if w == 1 {
        String::new()
    } else {
        format!(" [label=\"{w}\"]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::example1;
    use crate::instance::Activity;

    #[test]
    fn example1_structure() {
        let net = TtpnrNet::build(&example1()).unwrap();
        // source, 6 arcs, sink, one resource
        assert_eq!(net.places().len(), 9);
        assert_eq!(net.transitions().len(), 6);
        let kinds: Vec<_> = net.places().iter().map(|p| p.kind).collect();
        assert_eq!(kinds[0], PlaceKind::Source);
        assert_eq!(kinds[1], PlaceKind::Precedence { from: 0, to: 1 });
        assert_eq!(kinds[7], PlaceKind::Sink);
        assert_eq!(kinds[8], PlaceKind::Resource(0));

        let m0 = net.initial_marking();
        assert_eq!(m0[net.source_place()], 1);
        assert_eq!(m0[net.resource_place(0)], 2);
        assert_eq!(m0.iter().sum::<u32>(), 3);

        let b = net.transition(1);
        assert_eq!(b.duration, 3);
        assert!(b.inputs.contains(&(net.resource_place(0), 1)));
        assert!(b.outputs.contains(&(net.resource_place(0), 1)));
    }

    #[test]
    fn dummies_have_no_resource_arcs() {
        let net = TtpnrNet::build(&example1()).unwrap();
        for t in [net.transition(0), net.transition(5)] {
            assert!(t
                .inputs
                .iter()
                .chain(&t.outputs)
                .all(|&(p, _)| !matches!(net.place(p).kind, PlaceKind::Resource(_))));
        }
    }

    #[test]
    fn zero_duration_activity_has_no_resource_arcs() {
        let acts = vec![
            Activity::new(0, 0, vec![0]),
            Activity::new(1, 0, vec![2]),
            Activity::new(2, 0, vec![0]),
        ];
        let inst = RcpspInstance::new(acts, [(0, 1), (1, 2)], vec![2]);
        let net = TtpnrNet::build(&inst).unwrap();
        assert_eq!(net.transition(1).inputs, vec![(1, 1)]);
    }

    #[test]
    fn precedence_places_have_one_producer_and_consumer() {
        let net = TtpnrNet::build(&example1()).unwrap();
        for p in net.places() {
            if let PlaceKind::Precedence { from, to } = p.kind {
                let producers: Vec<_> = net
                    .transitions()
                    .iter()
                    .filter(|t| t.outputs.contains(&(p.id, 1)))
                    .map(|t| t.id)
                    .collect();
                let consumers: Vec<_> = net
                    .transitions()
                    .iter()
                    .filter(|t| t.inputs.contains(&(p.id, 1)))
                    .map(|t| t.id)
                    .collect();
                assert_eq!(producers, vec![from]);
                assert_eq!(consumers, vec![to]);
            }
        }
    }

    #[test]
    fn invalid_instance_rejected() {
        let base = example1();
        let mut acts = base.activities().to_vec();
        acts[2].demands[0] = 5;
        let inst = RcpspInstance::new(acts, base.precedence().clone(), vec![2]);
        assert!(TtpnrNet::build(&inst).is_err());
    }

    #[test]
    fn dot_mentions_every_node() {
        let net = TtpnrNet::build(&example1()).unwrap();
        let dot = net.to_dot();
        assert!(dot.contains("label=\"source (1)\""));
        assert!(dot.contains("label=\"r0 (2)\""));
        assert_eq!(dot.matches("shape=box").count(), 6);
    }
}
