//! Inlining compiler from [`AsmUnit`] to a flat [`Program`].
//!
//! Every call site gets its own copy of the callee, named by its call path
//! (`main.3`, `main/step@5.0`). Control instructions cost nothing: a chain of
//! `goto`/`call`/return is followed at compile time to the next step, and a
//! chain that never reaches one becomes an idle state.
//!
//! The `start` row copies the row of the first step of `main`, and with a
//! single handler the `limit` row copies the row of the handler's first step,
//! so `main: onlimit DONE; LOOP: goto LOOP; DONE: halt` halts exactly at w.
//!
//! With several distinct handlers in scope, scratch cells `0..m` hold the
//! active handler as a unary code (`j` leading ones for handler `j`, where
//! `m + 1` handlers exist). The code is rewritten whenever a call or return
//! changes the handler, which requires the head position there to be known
//! statically. At a limit the field is read from cell 0 and control jumps to
//! the matching handler with the head back at cell 0. A code held steady over
//! a block survives its limit unchanged. User code must leave those cells
//! alone.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{pattern_matches, pattern_write, AsmError, AsmUnit, Instr, Pos};
use crate::machine::{Action, Move, Program, HALT, LIMIT, START};

/// Where control resumes at a limit: a label in an instance, or `main` restarted.
type Handler = Option<(usize, usize)>;

struct Inst {
    path: String,
    routine: usize,
    parent: Option<(usize, usize)>,
    mode: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Tgt {
    Node(usize),
    Halt,
}

#[derive(Clone, Copy, Debug)]
struct Link {
    to: Tgt,
    /// Mode change `(from, to)` performed before reaching `to`.
    switch: Option<(usize, usize)>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Head {
    At(usize),
    Unknown,
}

enum Kind {
    Step(usize, usize),
    Idle,
}

struct Node {
    name: String,
    inst: usize,
    kind: Kind,
    next: Option<Link>,
    alt: Option<Link>,
}

struct Compiler<'a> {
    u: &'a AsmUnit,
    insts: Vec<Inst>,
    children: HashMap<(usize, usize), usize>,
    nodes: Vec<Node>,
    index: HashMap<(usize, usize, bool), usize>,
    queue: VecDeque<usize>,
}

/// Compiles a parsed unit; the result always passes `Program::validate`.
pub fn compile(u: &AsmUnit) -> Result<Program, AsmError> {
    let main = u.routines.iter().position(|r| r.name == "main").ok_or(AsmError {
        line: 1,
        col: 1,
        msg: "no routine named `main`".into(),
    })?;
    let mut c = Compiler {
        u,
        insts: Vec::new(),
        children: HashMap::new(),
        nodes: Vec::new(),
        index: HashMap::new(),
        queue: VecDeque::new(),
    };
    let mut handlers: Vec<Handler> = Vec::new();
    c.expand(main, "main".into(), None, None, &mut vec![main], &mut handlers)?;
    let m = handlers.len() - 1;

    let start_link = c.resolve(0, 0, c.insts[0].mode);
    let limit_links: Vec<Link> = handlers
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let (i, pc) = h.unwrap_or((0, 0));
            c.resolve(i, pc, j)
        })
        .collect();
    while let Some(n) = c.queue.pop_front() {
        let (inst, kind_pc) = (c.nodes[n].inst, match c.nodes[n].kind {
            Kind::Step(_, pc) => Some(pc),
            Kind::Idle => None,
        });
        let Some(pc) = kind_pc else { continue };
        let mode = c.insts[inst].mode;
        let r = &c.u.routines[c.insts[inst].routine];
        let alt = match &r.body[pc].0 {
            Instr::On(_, l) => Some(r.labels[l]),
            _ => None,
        };
        let next = c.resolve(inst, pc + 1, mode);
        c.nodes[n].next = Some(next);
        if let Some(l) = alt {
            let a = c.resolve(inst, l, mode);
            c.nodes[n].alt = Some(a);
        }
    }

    let heads = c.head_positions(&start_link, &limit_links);
    c.emit(m, &start_link, &limit_links, &heads)
}

impl Compiler<'_> {
    fn expand(
        &mut self,
        routine: usize,
        path: String,
        parent: Option<(usize, usize)>,
        inherited: Handler,
        stack: &mut Vec<usize>,
        handlers: &mut Vec<Handler>,
    ) -> Result<usize, AsmError> {
        let id = self.insts.len();
        let r = &self.u.routines[routine];
        let handler = r.onlimit.as_ref().map(|(l, _)| (id, r.labels[l])).or(inherited);
        let mode = match handlers.iter().position(|h| *h == handler) {
            Some(j) => j,
            None => {
                handlers.push(handler);
                handlers.len() - 1
            }
        };
        self.insts.push(Inst { path: path.clone(), routine, parent, mode });
        for (pc, (ins, pos)) in r.body.iter().enumerate() {
            let Instr::Call(name) = ins else { continue };
            let callee = self.u.routines.iter().position(|x| &x.name == name).ok_or_else(|| unknown(*pos, name))?;
            if stack.contains(&callee) {
                return Err(AsmError { line: pos.line, col: pos.col, msg: format!("recursive call to `{name}`") });
            }
            stack.push(callee);
            let child = self.expand(callee, format!("{path}/{name}@{pc}"), Some((id, pc)), handler, stack, handlers)?;
            stack.pop();
            self.children.insert((id, pc), child);
        }
        Ok(id)
    }

    fn node(&mut self, inst: usize, pc: usize, idle: bool) -> usize {
        if let Some(&n) = self.index.get(&(inst, pc, idle)) {
            return n;
        }
        let n = self.nodes.len();
        let name = format!("{}.{pc}", self.insts[inst].path);
        let kind = if idle { Kind::Idle } else { Kind::Step(inst, pc) };
        self.nodes.push(Node { name, inst, kind, next: None, alt: None });
        self.index.insert((inst, pc, idle), n);
        self.queue.push_back(n);
        n
    }

    /// Follows free control flow from `(inst, pc)` to the next step.
    fn resolve(&mut self, mut inst: usize, mut pc: usize, from: usize) -> Link {
        let mut seen = Vec::new();
        let to = loop {
            if seen.contains(&(inst, pc)) {
                break Tgt::Node(self.node(inst, pc, true));
            }
            seen.push((inst, pc));
            let r = &self.u.routines[self.insts[inst].routine];
            match r.body.get(pc).map(|x| &x.0) {
                None => match self.insts[inst].parent {
                    None => break Tgt::Halt,
                    Some((p, at)) => (inst, pc) = (p, at + 1),
                },
                Some(Instr::Goto(l)) => pc = r.labels[l],
                Some(Instr::Call(_)) => (inst, pc) = (self.children[&(inst, pc)], 0),
                Some(Instr::Halt) => break Tgt::Halt,
                Some(_) => break Tgt::Node(self.node(inst, pc, false)),
            }
        };
        let switch = match to {
            Tgt::Node(n) if self.insts[self.nodes[n].inst].mode != from => Some((from, self.insts[self.nodes[n].inst].mode)),
            _ => None,
        };
        Link { to, switch }
    }

    fn step_move(&self, n: usize) -> Move {
        match self.nodes[n].kind {
            Kind::Step(inst, pc) => match &self.u.routines[self.insts[inst].routine].body[pc].0 {
                Instr::Move(m) => *m,
                _ => Move::S,
            },
            Kind::Idle => Move::S,
        }
    }

    /// Head position on entry to each node, where it is the same on every path.
    fn head_positions(&self, start: &Link, limits: &[Link]) -> Vec<Option<Head>> {
        let mut at: Vec<Option<Head>> = vec![None; self.nodes.len()];
        let mut changes = vec![0u32; self.nodes.len()];
        let mut work = VecDeque::new();
        let mut push = |at: &mut Vec<Option<Head>>, work: &mut VecDeque<usize>, l: &Link, h: Head| {
            let Tgt::Node(n) = l.to else { return };
            let joined = match at[n] {
                None => h,
                Some(old) if old == h => return,
                Some(_) if changes[n] >= 3 => Head::Unknown,
                Some(Head::Unknown) => return,
                Some(_) => Head::Unknown,
            };
            if at[n] == Some(joined) {
                return;
            }
            changes[n] += 1;
            at[n] = Some(joined);
            work.push_back(n);
        };
        push(&mut at, &mut work, start, Head::At(0));
        for l in limits {
            push(&mut at, &mut work, l, Head::At(0));
        }
        while let Some(n) = work.pop_front() {
            let after = match at[n] {
                Some(Head::At(h)) => Head::At(self.step_move(n).apply(h)),
                _ => Head::Unknown,
            };
            for l in [self.nodes[n].next, self.nodes[n].alt].into_iter().flatten() {
                push(&mut at, &mut work, &l, after);
            }
        }
        at
    }

    fn emit(&self, m: usize, start: &Link, limits: &[Link], heads: &[Option<Head>]) -> Result<Program, AsmError> {
        let mut rows: BTreeMap<String, [Action; 8]> = BTreeMap::new();
        let mut order: Vec<String> = Vec::new();
        let mut add = |rows: &mut BTreeMap<String, [Action; 8]>, name: String, f: &dyn Fn(u8) -> Action| {
            order.push(name.clone());
            rows.insert(name, std::array::from_fn(|r| f(r as u8)));
        };
        let same = |r: u8, mv: Move, next: &str| Action { write: r, mv, next: next.to_string() };

        // Materializes a link from a source whose head ends at `h`.
        let link = |rows: &mut BTreeMap<String, [Action; 8]>,
                        add: &mut dyn FnMut(&mut BTreeMap<String, [Action; 8]>, String, &dyn Fn(u8) -> Action),
                        src: &str,
                        l: &Link,
                        h: Option<Head>|
         -> Result<String, AsmError> {
            let dest = match l.to {
                Tgt::Node(n) => self.nodes[n].name.clone(),
                Tgt::Halt => HALT.to_string(),
            };
            let Some((_, to)) = l.switch else { return Ok(dest) };
            let Some(Head::At(h)) = h else {
                let pos = self.node_pos(l.to);
                return Err(AsmError {
                    line: pos.line,
                    col: pos.col,
                    msg: "changing the active onlimit handler here needs a statically known head position".into(),
                });
            };
            let mut moves: Vec<(Option<u8>, Move)> = vec![(None, Move::L); h];
            moves.extend((0..m).map(|c| (Some(u8::from(c < to)), Move::R)));
            if h > m {
                moves.extend(vec![(None, Move::R); h - m]);
            } else {
                moves.extend(vec![(None, Move::L); m - h]);
            }
            let names: Vec<String> = (0..moves.len()).map(|k| format!("{src}>{k}")).collect();
            for (k, (bit, mv)) in moves.iter().enumerate() {
                let next = names.get(k + 1).cloned().unwrap_or_else(|| dest.clone());
                let (bit, mv) = (*bit, *mv);
                add(rows, names[k].clone(), &move |r| Action {
                    write: bit.map_or(r, |b| r & 0b101 | b << 1),
                    mv,
                    next: next.clone(),
                });
            }
            Ok(names.first().cloned().unwrap_or(dest))
        };

        let start_name = link(&mut rows, &mut add, START, start, Some(Head::At(0)))?;
        let limit_names: Vec<String> = limits
            .iter()
            .enumerate()
            .map(|(j, l)| link(&mut rows, &mut add, &format!("{LIMIT}>h{j}"), l, Some(Head::At(0))))
            .collect::<Result<_, _>>()?;

        for (n, node) in self.nodes.iter().enumerate() {
            let after = match heads[n] {
                Some(Head::At(h)) => Some(Head::At(self.step_move(n).apply(h))),
                other => other,
            };
            let next = match node.next {
                Some(l) => link(&mut rows, &mut add, &format!("{}>n", node.name), &l, after)?,
                None => node.name.clone(),
            };
            let alt = match node.alt {
                Some(l) => Some(link(&mut rows, &mut add, &format!("{}>a", node.name), &l, after)?),
                None => None,
            };
            let ins = match node.kind {
                Kind::Step(i, pc) => Some(&self.u.routines[self.insts[i].routine].body[pc].0),
                Kind::Idle => None,
            };
            let row: [Action; 8] = std::array::from_fn(|r| {
                let r = r as u8;
                match ins {
                    None => same(r, Move::S, &node.name),
                    Some(Instr::Write(p)) => Action { write: pattern_write(p, r), mv: Move::S, next: next.clone() },
                    Some(Instr::Move(mv)) => same(r, *mv, &next),
                    Some(Instr::On(p, _)) if pattern_matches(p, r) => same(r, Move::S, alt.as_deref().unwrap_or(HALT)),
                    Some(_) => same(r, Move::S, &next),
                }
            });
            add(&mut rows, node.name.clone(), &|r| row[r as usize].clone());
        }

        let copy = |rows: &BTreeMap<String, [Action; 8]>, name: &str, r: u8| -> Action {
            match rows.get(name) {
                Some(row) => row[r as usize].clone(),
                None => same(r, Move::S, HALT),
            }
        };
        let start_row: [Action; 8] = std::array::from_fn(|r| copy(&rows, &start_name, r as u8));

        // Dispatch: `limit` reads cell 0, `limit>d{k}` reads cell k.
        let mut dispatch: Vec<(String, [Action; 8])> = Vec::new();
        let back = |j: usize, cell: usize| -> String {
            if cell == 0 {
                limit_names[j].clone()
            } else {
                format!("{LIMIT}>b{j}.{cell}")
            }
        };
        let reader = |k: usize| if k == 0 { LIMIT.to_string() } else { format!("{LIMIT}>d{k}") };
        for k in 0..m.max(1) {
            let row: [Action; 8] = std::array::from_fn(|r| {
                let r = r as u8;
                let j = if m == 0 || r >> 1 & 1 == 0 {
                    k
                } else if k + 1 < m {
                    return same(r, Move::R, &reader(k + 1));
                } else {
                    m
                };
                if k == 0 {
                    copy(&rows, &limit_names[j], r)
                } else {
                    same(r, Move::L, &back(j, k - 1))
                }
            });
            dispatch.push((reader(k), row));
        }
        for j in 0..=m {
            for cell in 1..m {
                let row: [Action; 8] = std::array::from_fn(|r| same(r as u8, Move::L, &back(j, cell - 1)));
                dispatch.push((back(j, cell), row));
            }
        }

        let mut names: Vec<&str> = Vec::new();
        names.extend(order.iter().map(String::as_str));
        names.extend(dispatch.iter().skip(1).map(|(n, _)| n.as_str()));
        let mut p = Program::new(&names, 3);
        let mut put = |state: &str, row: &[Action; 8]| {
            for (r, a) in row.iter().enumerate() {
                p.set(state, r as u8, a.write, a.mv, &a.next);
            }
        };
        put(START, &start_row);
        for (n, row) in &dispatch {
            put(n, row);
        }
        for n in &order {
            put(n, &rows[n]);
        }
        debug_assert!(p.validate().is_empty());
        Ok(p)
    }

    fn node_pos(&self, t: Tgt) -> Pos {
        match t {
            Tgt::Node(n) => match self.nodes[n].kind {
                Kind::Step(i, pc) => self.u.routines[self.insts[i].routine].body[pc].1,
                Kind::Idle => self.u.routines[self.insts[self.nodes[n].inst].routine].pos,
            },
            Tgt::Halt => Pos { line: 1, col: 1 },
        }
    }
}

fn unknown(pos: Pos, name: &str) -> AsmError {
    AsmError { line: pos.line, col: pos.col, msg: format!("call to unknown routine `{name}`") }
}
