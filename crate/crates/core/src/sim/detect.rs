//! Detector windows, comment rounds, warnings and quarantine.

use super::node::PendingJudgement;
use super::{Ev, World};
use crate::agent::HostCredentials;
use crate::crypto::CodeWord;
use crate::detection::{evaluate_rules, judge, Level, Suspicion};
use crate::kernel::SimTime;
use crate::protocol::{BehaviorCounters, NodeId, Packet};
use crate::routing::warning_tag;
use crate::trace::TraceRecord;

enum Action {
    Warn(NodeId, NodeId),
    Ask(NodeId, NodeId, BehaviorCounters),
}

impl World {
    fn trace_suspicion(&mut self, node: NodeId, s: &Suspicion, phase: &str) {
        let t = self.t();
        self.trace.push(|| TraceRecord::Detector {
            t,
            node,
            subject: s.subject,
            phase: phase.to_string(),
            level: s.level,
            rules: s.evidence.iter().copied().collect(),
            votes_for: s.votes_for,
            votes_against: s.votes_against,
        });
    }

    pub(crate) fn on_detector_tick(&mut self) {
        let bucket = SimTime::from_secs_f64(self.cfg.detector.bucket_s);
        let window = SimTime::from_secs_f64(self.cfg.detector.window_s);
        let now = self.now();
        let mut actions = Vec::new();
        let mut traced = Vec::new();
        for node in self.nodes.iter().filter(|n| n.alive() && n.role.is_honest()) {
            for (subject, c) in node.window.totals() {
                if subject == node.id || node.quarantine.contains(subject) {
                    continue;
                }
                let s = evaluate_rules(subject, &c, &self.cfg.detector);
                match s.level {
                    Level::Clear => continue,
                    Level::Confirmed => actions.push(Action::Warn(node.id, subject)),
                    Level::Suspect => {
                        if c.rrep_sent >= 1 && !node.judgements.contains_key(&subject) {
                            actions.push(Action::Ask(node.id, subject, c));
                        }
                    }
                }
                traced.push((node.id, s));
            }
        }
        for (n, s) in traced {
            self.trace_suspicion(n, &s, "window");
        }
        for a in actions {
            match a {
                Action::Warn(n, subject) => self.issue_warning(n, subject, "rules"),
                Action::Ask(n, subject, own) => self.ask_comments(n, subject, own),
            }
        }
        for node in self.nodes.iter_mut() {
            node.window.rotate();
            let cutoff = now.saturating_sub(window);
            for w in node.watch.values_mut() {
                w.retain(|_, at| *at >= cutoff);
            }
        }
        self.after(bucket, Ev::DetectorTick);
    }

    fn ask_comments(&mut self, n: NodeId, subject: NodeId, own: BehaviorCounters) {
        if self.nodes[n.index()].quarantine.contains(subject) {
            return;
        }
        self.nodes[n.index()]
            .judgements
            .insert(subject, PendingJudgement { own, replies: Vec::new() });
        self.stats.comment_requests += 1;
        let t = self.t();
        self.trace.push(|| TraceRecord::CommentRequest { t, node: n, subject });
        self.broadcast(n, Packet::CommentRequest { src: n, subject });
        let d = SimTime::from_secs_f64(self.cfg.detector.judgement_ms / 1000.0);
        self.after(d, Ev::Judgement { node: n, subject });
    }

    pub(crate) fn on_comment_request(&mut self, me: NodeId, src: NodeId, subject: NodeId) {
        let node = &self.nodes[me.index()];
        if !node.role.is_honest() || subject == me || !node.matrix.is_valid(src) || node.quarantine.contains(src) {
            return;
        }
        let counters = node.window.total(subject);
        if counters.is_empty() {
            return;
        }
        self.unicast(me, src, Packet::CommentReply { src: me, subject, counters }, None);
    }

    pub(crate) fn on_comment_reply(&mut self, me: NodeId, src: NodeId, subject: NodeId, counters: BehaviorCounters) {
        let node = &mut self.nodes[me.index()];
        if !node.matrix.is_valid(src) {
            return;
        }
        if let Some(j) = node.judgements.get_mut(&subject) {
            j.replies.push(counters);
        }
    }

    pub(crate) fn on_judgement(&mut self, me: NodeId, subject: NodeId) {
        let node = &mut self.nodes[me.index()];
        let Some(j) = node.judgements.remove(&subject) else {
            return;
        };
        if !node.alive() || node.quarantine.contains(subject) {
            return;
        }
        let mut own = node.window.total(subject);
        if own.is_empty() {
            own = j.own;
        }
        match judge(subject, &own, &j.replies, &self.cfg.detector) {
            Ok(v) => {
                self.trace_suspicion(me, &v.suspicion, "judgement");
                if v.malicious {
                    self.issue_warning(me, subject, "judgement");
                }
            }
            Err(_) => {
                let s = evaluate_rules(subject, &own, &self.cfg.detector);
                self.trace_suspicion(me, &s, "no_responders");
            }
        }
    }

    fn tag_for(&self, n: NodeId, subject: NodeId) -> Option<CodeWord> {
        self.tag_for_origin(n, n, subject)
    }

    /// Quarantines `subject` locally and floods the warning.
    pub(crate) fn issue_warning(&mut self, origin: NodeId, subject: NodeId, reason: &str) {
        if !self.defense() || self.nodes[origin.index()].quarantine.contains(subject) {
            return;
        }
        let Some(tag) = self.tag_for(origin, subject) else {
            return;
        };
        self.stats.warnings += 1;
        self.detected.insert(subject);
        let t = self.t();
        self.trace.push(|| TraceRecord::Warning {
            t,
            origin,
            subject,
            reason: reason.to_string(),
        });
        self.apply_quarantine(origin, subject);
        self.broadcast(origin, Packet::Warning { src: origin, subject, tag });
    }

    pub(crate) fn on_warning(&mut self, me: NodeId, src: NodeId, subject: NodeId, tag: CodeWord) {
        let node = &self.nodes[me.index()];
        if !node.role.is_honest() || subject == me || node.quarantine.contains(subject) || node.quarantine.contains(src) {
            return;
        }
        if self.cfg.routing.warning_auth && self.tag_for_origin(me, src, subject).as_ref() != Some(&tag) {
            return;
        }
        self.apply_quarantine(me, subject);
        if let Some(tag) = self.tag_for(me, subject) {
            self.broadcast(me, Packet::Warning { src: me, subject, tag });
        }
    }

    /// The tag `origin` should have attached, computed with `me`'s codes.
    fn tag_for_origin(&self, me: NodeId, origin: NodeId, subject: NodeId) -> Option<CodeWord> {
        match &self.nodes[me.index()].creds {
            HostCredentials::Provisioned(c) => Some(warning_tag(&c.h_node, &c.code2, origin, subject)),
            HostCredentials::Enemy(_) => None,
        }
    }

    fn apply_quarantine(&mut self, me: NodeId, subject: NodeId) {
        let node = &mut self.nodes[me.index()];
        if !node.quarantine.insert(subject) {
            return;
        }
        node.matrix.quarantine(subject);
        node.routes.purge_node(subject);
        node.trust_memory.remove(&subject);
        node.window.forget(subject);
        node.watch.remove(&subject);
        node.judgements.remove(&subject);
        node.discoveries.remove(&subject);
        let dropped = node.buffer.remove(&subject).unwrap_or_default();
        if let Some(a) = node.agent.as_mut() {
            a.state.skip(subject);
        }
        let t = self.t();
        self.trace.push(|| TraceRecord::Quarantine { t, node: me, subject });
        for d in dropped {
            self.drop_data(me, d.uid, "quarantined_dst");
        }
    }
}
