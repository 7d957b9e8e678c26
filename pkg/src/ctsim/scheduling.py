"""Concurrent-group formation from a superframe's transmission requests.

The coordinator walks the requests in priority order (slowest links
first), draws a stochastic admission check that gets harsher as the group
under construction grows, and then first-fit packs each admitted request
into the earliest group where it neither shares an endpoint nor
cross-interferes with any member, subject to the transmission-period slot
budget.  Adding a member re-prices every member of that group for the
higher concurrency level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, link_rate, slots_for_payload
from .geometry import NodeLayout

# Each existing member of the target group adds this much rejection
# probability to the admission draw (NLOS obstruction and intra-group
# interference folded into one knob).
REJECTION_PROB_PER_MEMBER = 0.1

INTERFERENCE_MODELS = ("dual", "tx_beam")


@dataclass(frozen=True)
class TReq:
    """One transmission request: requester, its next hop, and slot demand.

    `slots` is the demand priced for the request alone (concurrency level
    1); the scheduler re-prices members as groups grow.  `flow_id` ties
    the request back to the end-to-end flow this hop serves.
    """

    requester: int
    next_dest: int
    slots: int
    flow_id: int

    def __post_init__(self) -> None:
        if self.requester == self.next_dest:
            raise ValueError("requester and next_dest must differ")
        if self.slots < 1:
            raise ValueError("slots must be >= 1")


@dataclass
class Group:
    """A set of mutually compatible requests transmitting concurrently.

    `member_slots[i]` is members[i]'s demand re-priced for this group's
    size; the group's air time is the slowest member's demand.
    """

    members: list[TReq] = field(default_factory=list)
    member_slots: list[int] = field(default_factory=list)
    duration_slots: int = 0


@dataclass
class Schedule:
    """Outcome of one scheduling pass over a request set.

    Every input request lands in exactly one of `groups` (will transmit),
    `deferred` (no room in the slot budget this superframe) or `rejected`
    (failed the admission draw).
    """

    groups: list[Group]
    deferred: list[TReq]
    rejected: list[TReq]

    @property
    def total_duration_slots(self) -> int:
        return sum(g.duration_slots for g in self.groups)

    @property
    def scheduled_count(self) -> int:
        return sum(len(g.members) for g in self.groups)


def prioritize(requests: list[TReq]) -> list[TReq]:
    """Sort requests by descending slot demand (slowest links first).

    Ties break by requester id, then flow id, so the order is total and
    reproducible.
    """
    return sorted(requests, key=lambda r: (-r.slots, r.requester, r.flow_id))


def _beam_disturbs(a: TReq, b: TReq, layout: NodeLayout, dual: bool) -> bool:
    """True if a's transmission lands on b's receiver (one direction)."""
    sectors = layout.sector_matrix
    hit = (
        sectors[a.requester][b.next_dest] == sectors[a.requester][a.next_dest]
        and layout.distance_matrix[a.requester][b.next_dest]
        <= layout.coverage_radius
    )
    if not hit:
        return False
    if not dual:
        return True
    # Receive-side check: b's receiver only suffers if it is listening in
    # the sector the offending transmitter sits in.
    return sectors[b.next_dest][b.requester] == sectors[b.next_dest][a.requester]


def conflicts(a: TReq, b: TReq, layout: NodeLayout, model: str = "dual") -> bool:
    """Whether two requests cannot transmit concurrently.

    Endpoint overlap always conflicts (a node cannot take part in two
    transmissions at once).  Otherwise the transmit beams are tested:
    under the default "dual" model a conflict needs the victim receiver
    both inside the offender's transmit wedge and listening toward the
    offender; "tx_beam" relaxes it to the transmit wedge alone.
    Symmetric in its arguments.
    """
    if a == b:
        raise ValueError("conflicts() needs two distinct requests")
    if model not in INTERFERENCE_MODELS:
        raise ValueError(f"unknown interference model {model!r}")
    if {a.requester, a.next_dest} & {b.requester, b.next_dest}:
        return True
    dual = model == "dual"
    return _beam_disturbs(a, b, layout, dual) or _beam_disturbs(b, a, layout, dual)


def admit(group_size_so_far: int, rng: np.random.Generator) -> bool:
    """Draw the admission check against a group of the given current size.

    Rejection probability is 0.1 per existing member, capped at 1, so an
    empty group always admits and a group of 10+ always rejects.  Exactly
    one uniform variate is consumed per call.
    """
    if group_size_so_far < 0:
        raise ValueError("group_size_so_far must be >= 0")
    p_reject = min(1.0, REJECTION_PROB_PER_MEMBER * group_size_so_far)
    return rng.random() >= p_reject


def build_schedule(
    requests: list[TReq],
    layout: NodeLayout,
    params: ChannelParams,
    budget_slots: int,
    rng: np.random.Generator,
    interference_model: str = "dual",
) -> Schedule:
    """Greedy single-pass group formation over the prioritized requests.

    For each request, in priority order:

    1. One admission draw against the size of the currently open (most
       recently created) group; a failed draw rejects the request for
       this superframe.
    2. First-fit over existing groups: the request joins the first group
       with no endpoint or interference conflict whose insertion keeps
       the total schedule inside `budget_slots` after every member is
       re-priced at the new concurrency level.  An insertion that busts
       the budget is rolled back and the next group is tried.
    3. Otherwise a fresh group is opened if the budget allows, else the
       request is deferred to a later superframe.
    """
    if budget_slots < 0:
        raise ValueError("budget_slots must be >= 0")
    for req in requests:
        if not (0 <= req.requester < layout.n and 0 <= req.next_dest < layout.n):
            raise ValueError(f"request endpoints {req} not in layout")

    dm = layout.distance_matrix
    slot_cache: dict[tuple[int, int, int], int] = {}

    def priced_slots(req: TReq, active_flows: int) -> int:
        key = (req.requester, req.next_dest, active_flows)
        if key not in slot_cache:
            rate = link_rate(params, dm[req.requester][req.next_dest], active_flows)
            slot_cache[key] = slots_for_payload(params, rate)
        return slot_cache[key]

    groups: list[Group] = []
    deferred: list[TReq] = []
    rejected: list[TReq] = []
    total = 0

    for req in prioritize(requests):
        open_size = len(groups[-1].members) if groups else 0
        if not admit(open_size, rng):
            rejected.append(req)
            continue
        placed = False
        for g in groups:
            if any(
                conflicts(req, m, layout, interference_model) for m in g.members
            ):
                continue
            new_size = len(g.members) + 1
            new_slots = [priced_slots(m, new_size) for m in g.members]
            new_slots.append(priced_slots(req, new_size))
            new_duration = max(new_slots)
            if total - g.duration_slots + new_duration <= budget_slots:
                total += new_duration - g.duration_slots
                g.members.append(req)
                g.member_slots = new_slots
                g.duration_slots = new_duration
                placed = True
                break
        if not placed:
            duration = priced_slots(req, 1)
            if total + duration <= budget_slots:
                groups.append(
                    Group(members=[req], member_slots=[duration], duration_slots=duration)
                )
                total += duration
            else:
                deferred.append(req)
    return Schedule(groups=groups, deferred=deferred, rejected=rejected)
