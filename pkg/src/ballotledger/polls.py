"""Poll lifecycle: Created -> Open -> Closed, voter registration, vote
casting with eligibility checks, tally and result publication.

PollBook is the pure state machine: it validates and mutates poll state but
knows nothing about the ledger or cost accounting (the service layer wires
those). Identity verification is injected as a predicate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import (
    AlreadyVoted,
    BadChoice,
    BadOptions,
    NotCreator,
    NotFound,
    NotRegistered,
    NoVoters,
    PollNotOpen,
    UnknownVoter,
    UnverifiedCreator,
    WrongState,
)

CREATED = "Created"
OPEN = "Open"
CLOSED = "Closed"


def tally(votes: dict[str, int], option_count: int) -> int:
    """Winning option index: argmax of per-option counts, ties broken by the
    lowest index. Zero votes therefore yields index 0."""
    if option_count < 2:
        raise BadOptions("a poll needs at least two options")
    counts = [0] * option_count
    for choice in votes.values():
        counts[choice] += 1
    return max(range(option_count), key=lambda i: (counts[i], -i))


@dataclass
class Poll:
    poll_id: str
    name: str
    description: str
    options: list[str]
    creator: str
    registered_voters: set[str] = field(default_factory=set)
    is_open_to_all: bool = False
    status: str = CREATED
    votes: dict[str, int] = field(default_factory=dict)
    result: Optional[int] = None

    def vote_counts(self) -> list[int]:
        counts = [0] * len(self.options)
        for choice in self.votes.values():
            counts[choice] += 1
        return counts


class PollBook:
    def __init__(self, is_verified: Callable[[str], bool]):
        self.is_verified = is_verified
        self.polls: dict[str, Poll] = {}
        self._next_poll = 0

    def get(self, poll_id: str) -> Poll:
        poll = self.polls.get(poll_id)
        if poll is None:
            raise NotFound(f"no poll {poll_id!r}")
        return poll

    def _require_creator(self, poll: Poll, caller: str) -> None:
        if caller != poll.creator:
            raise NotCreator(f"only the creator may manage {poll.poll_id}")

    # -- lifecycle operations -------------------------------------------------

    def create_poll(self, creator: str, name: str, description: str,
                    options: Sequence[str]) -> Poll:
        if not self.is_verified(creator):
            raise UnverifiedCreator("poll creator must be a verified identity")
        options = list(options)
        if len(options) < 2 or len(set(options)) != len(options) or any(
                not isinstance(o, str) or not o for o in options):
            raise BadOptions("options must be at least two distinct non-empty strings")
        poll = Poll(poll_id=f"poll-{self._next_poll}", name=name,
                    description=description, options=options, creator=creator)
        self._next_poll += 1
        self.polls[poll.poll_id] = poll
        return poll

    def register_voters(self, poll_id: str, caller: str, voters: Sequence[str]) -> int:
        """Merge verified ids into the poll's electorate; returns the total
        registered after the merge (duplicates are set-idempotent)."""
        poll = self.get(poll_id)
        self._require_creator(poll, caller)
        if poll.status != CREATED:
            raise WrongState("voters register before the poll opens")
        for voter in voters:
            if not self.is_verified(voter):
                raise UnknownVoter(f"{voter!r} is not a verified identity")
        poll.registered_voters.update(voters)
        return len(poll.registered_voters)

    def set_open(self, poll_id: str, caller: str) -> None:
        poll = self.get(poll_id)
        self._require_creator(poll, caller)
        if poll.status != CREATED:
            raise WrongState(f"setOpen requires state Created, not {poll.status}")
        poll.is_open_to_all = True

    def open_poll(self, poll_id: str, caller: str) -> None:
        poll = self.get(poll_id)
        self._require_creator(poll, caller)
        if poll.status != CREATED:
            raise WrongState(f"openPoll requires state Created, not {poll.status}")
        if not poll.registered_voters and not poll.is_open_to_all:
            raise NoVoters("a poll with no registered voters cannot open")
        poll.status = OPEN

    def cast_vote(self, poll_id: str, voter: str, choice: int) -> bool:
        """Record the vote; returns True when this ballot exhausted a closed
        electorate (the caller then auto-closes the poll)."""
        poll = self.get(poll_id)
        if poll.status != OPEN:
            raise PollNotOpen(f"poll {poll_id} is {poll.status}")
        if not self.is_verified(voter):
            raise NotRegistered(f"{voter!r} is not a verified identity")
        if not poll.is_open_to_all and voter not in poll.registered_voters:
            raise NotRegistered(f"{voter!r} is not registered to poll {poll_id}")
        if voter in poll.votes:
            raise AlreadyVoted(f"{voter!r} already voted in poll {poll_id}")
        if not isinstance(choice, int) or not 0 <= choice < len(poll.options):
            raise BadChoice(f"choice must be in [0, {len(poll.options)})")
        poll.votes[voter] = choice
        return (not poll.is_open_to_all
                and len(poll.votes) == len(poll.registered_voters))

    def close_poll(self, poll_id: str, caller: str) -> int:
        poll = self.get(poll_id)
        self._require_creator(poll, caller)
        if poll.status != OPEN:
            raise WrongState(f"closePoll requires state Open, not {poll.status}")
        return self._close(poll)

    def auto_close(self, poll_id: str) -> int:
        """Close triggered by the final registered ballot; no caller check."""
        poll = self.get(poll_id)
        if poll.status != OPEN:
            raise WrongState(f"auto-close requires state Open, not {poll.status}")
        return self._close(poll)

    @staticmethod
    def _close(poll: Poll) -> int:
        poll.status = CLOSED
        poll.result = tally(poll.votes, len(poll.options))
        return poll.result

    def get_results(self, poll_id: str) -> Optional[tuple[int, str]]:
        """(index, label) of the winning option for a Closed poll, else None."""
        poll = self.get(poll_id)
        if poll.status != CLOSED:
            return None
        return poll.result, poll.options[poll.result]

    # -- replay (mutations driven from recorded transactions) ------------------

    def apply_create(self, poll_id: str, creator: str, name: str, description: str,
                     options: Sequence[str]) -> None:
        self.polls[poll_id] = Poll(poll_id=poll_id, name=name, description=description,
                                   options=list(options), creator=creator)
        self._next_poll += 1

    def apply_register(self, poll_id: str, voters: Sequence[str]) -> None:
        self.polls[poll_id].registered_voters.update(voters)

    def apply_set_open(self, poll_id: str) -> None:
        self.polls[poll_id].is_open_to_all = True

    def apply_open(self, poll_id: str) -> None:
        self.polls[poll_id].status = OPEN

    def apply_vote(self, poll_id: str, voter: str, choice: int) -> None:
        self.polls[poll_id].votes[voter] = choice

    def apply_close(self, poll_id: str) -> None:
        self.polls[poll_id].status = CLOSED

    def apply_result(self, poll_id: str, result: int) -> None:
        self.polls[poll_id].result = result

    # -- state snapshot ---------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "nextPoll": self._next_poll,
            "polls": {
                pid: {
                    "creator": p.creator,
                    "description": p.description,
                    "isOpenToAll": p.is_open_to_all,
                    "name": p.name,
                    "options": list(p.options),
                    "registeredVoters": sorted(p.registered_voters),
                    "result": p.result,
                    "status": p.status,
                    "votes": dict(sorted(p.votes.items())),
                }
                for pid, p in sorted(self.polls.items())
            },
        }
