//! Nets used throughout the test suites and shipped as example files.

use crate::net::{NetAnnotations, NetBuilder, PetriNet};

/// Two places, one transition: `p1 --2--> t1 --3--> p2`, two tokens on `p1`.
pub fn b2() -> PetriNet {
    let mut b = NetBuilder::new();
    let p1 = b.place("p1", 2);
    let p2 = b.place("p2", 0);
    let t1 = b.transition("t1");
    b.pre(p1, t1, 2).post(p2, t1, 3);
    b.build()
}

/// A single source transition pumping tokens into one place. Unbounded.
pub fn source() -> PetriNet {
    let mut b = NetBuilder::new();
    let p = b.place("p", 0);
    let t = b.transition("t");
    b.post(p, t, 1);
    b.build()
}

/// Producer/consumer over a two-slot buffer with a binary semaphore
/// (self-loop on `put` and `get`) guarding buffer access.
///
/// Producer cycle: `P_idle --produce--> P_busy --put--> P_idle`, where `put`
/// also moves a token `Empty_buf -> D_in_buf`. Consumer cycle mirrors it
/// through `get` and `consume`. The buffer places satisfy
/// `Empty_buf + D_in_buf = 2` in every reachable marking and the system
/// never deadlocks.
pub fn producer_consumer() -> (PetriNet, NetAnnotations) {
    let mut b = NetBuilder::new();
    let p_idle = b.place("P_idle", 1);
    let p_busy = b.place("P_busy", 0);
    let empty_buf = b.place("Empty_buf", 2);
    let d_in_buf = b.place("D_in_buf", 0);
    let c_idle = b.place("C_idle", 1);
    let c_busy = b.place("C_busy", 0);
    let sem = b.place("Sem", 1);

    let produce = b.transition("produce");
    let put = b.transition("put");
    let get = b.transition("get");
    let consume = b.transition("consume");

    b.pre(p_idle, produce, 1).post(p_busy, produce, 1);
    b.pre(p_busy, put, 1).post(p_idle, put, 1);
    b.pre(empty_buf, put, 1).post(d_in_buf, put, 1);
    b.pre(sem, put, 1).post(sem, put, 1);
    b.pre(d_in_buf, get, 1).post(empty_buf, get, 1);
    b.pre(c_idle, get, 1).post(c_busy, get, 1);
    b.pre(sem, get, 1).post(sem, get, 1);
    b.pre(c_busy, consume, 1).post(c_idle, consume, 1);

    (b.build(), NetAnnotations::default())
}

/// A writer process with actions on both places and transitions: `start`
/// acquires, the buffer place carries the `writing` action, `finish`
/// releases back to the request place.
pub fn writer() -> (PetriNet, NetAnnotations) {
    let mut b = NetBuilder::new();
    let req = b.place("req", 1);
    let buf = b.place("buf", 0);
    let done = b.place("done", 0);
    let start = b.transition("start");
    let finish = b.transition("finish");
    b.pre(req, start, 1).post(buf, start, 1);
    b.pre(buf, finish, 1).post(done, finish, 1);
    let net = b.build();

    let mut ann = NetAnnotations::default();
    ann.place_actions.insert(buf, "writing".into());
    ann.transition_actions.insert(start, "acquire".into());
    ann.transition_actions.insert(finish, "release".into());
    (net, ann)
}

/// Self-loop `p --1--> t --1--> p` with one token: `t` stays enabled forever.
pub fn self_loop() -> PetriNet {
    let mut b = NetBuilder::new();
    let p = b.place("p", 1);
    let t = b.transition("t");
    b.pre(p, t, 1).post(p, t, 1);
    b.build()
}
