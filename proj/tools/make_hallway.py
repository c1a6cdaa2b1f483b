#!/usr/bin/env python3
"""Writes data/hallway.flatpomdp, a reconstruction of the office hallway model.

Layout: an 11-cell corridor (row 0) with four side alcoves below columns
1, 3, 7 and 9 and the goal alcove below column 5. Each of the 15 non-goal
places is paired with a heading (N, E, S, W) giving 60 states; state 60 is
the absorbing goal.

Actions: stay, forward, turn right, turn left, turn around.
Forward moves with probability 0.8 when the way is open. Turns succeed with
probability 0.9. The reward R(s, a) is the probability of entering the goal.

Observations 0..15 are noisy wall readings (front, left, back, right; each
bit correct with probability 0.9), 16..19 are landmarks seen at the corridor
ends and the two inner alcoves, 20 is the goal.
"""

import argparse
import itertools
import pathlib

CORRIDOR = [(0, c) for c in range(11)]
ALCOVES = [(1, 1), (1, 3), (1, 7), (1, 9)]
GOAL = (1, 5)
PLACES = CORRIDOR + ALCOVES
LANDMARKS = {(0, 0): 16, (0, 10): 17, (1, 3): 18, (1, 7): 19}
HEADINGS = [(-1, 0), (0, 1), (1, 0), (0, -1)]  # N E S W
FORWARD_OK = 0.8
TURN_OK = 0.9
SENSOR_OK = 0.9
LANDMARK_SEEN = 0.8
GOAL_STATE = len(PLACES) * 4
OPEN = set(PLACES) | {GOAL}


def state(place, heading):
    return PLACES.index(place) * 4 + heading


def ahead(place, heading):
    dr, dc = HEADINGS[heading]
    return (place[0] + dr, place[1] + dc)


def transitions(s, a):
    place, heading = PLACES[s // 4], s % 4
    out = {}

    def add(target, p):
        out[target] = out.get(target, 0.0) + p

    if a == 0:
        add(s, 1.0)
    elif a == 1:
        nxt = ahead(place, heading)
        if nxt == GOAL:
            add(GOAL_STATE, FORWARD_OK)
            add(s, 1.0 - FORWARD_OK)
        elif nxt in OPEN:
            add(state(nxt, heading), FORWARD_OK)
            add(s, 1.0 - FORWARD_OK)
        else:
            add(s, 1.0)
    else:
        turn = {2: 1, 3: 3, 4: 2}[a]
        add(state(place, (heading + turn) % 4), TURN_OK)
        add(s, 1.0 - TURN_OK)
    return out


def wall_bits(place, heading):
    bits = 0
    for k, rel in enumerate((0, 3, 2, 1)):  # front, left, back, right
        if ahead(place, (heading + rel) % 4) not in OPEN:
            bits |= 1 << k
    return bits


def observations(s):
    if s == GOAL_STATE:
        return {20: 1.0}
    place, heading = PLACES[s // 4], s % 4
    truth = wall_bits(place, heading)
    out = {}
    scale = 1.0
    if place in LANDMARKS:
        out[LANDMARKS[place]] = LANDMARK_SEEN
        scale = 1.0 - LANDMARK_SEEN
    for z in range(16):
        p = scale
        for k in range(4):
            same = ((z >> k) & 1) == ((truth >> k) & 1)
            p *= SENSOR_OK if same else 1.0 - SENSOR_OK
        out[z] = out.get(z, 0.0) + p
    return out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "hallway.flatpomdp"))
    args = parser.parse_args()

    lines = [
        "# Office hallway navigation; generated by tools/make_hallway.py.",
        "# Reconstructed layout. Only the state, action and observation counts",
        "# follow the classic model; noise and reward constants are local choices.",
        "name: hallway",
        "meta: source tools/make_hallway.py",
        "discount: 0.95",
        "values: reward",
        "states: %d" % (GOAL_STATE + 1),
        "actions: stay forward right left around",
        "observations: 21",
        "start: " + " ".join(["%.17g" % (1.0 / GOAL_STATE)] * GOAL_STATE + ["0"]),
        "terminal: %d" % GOAL_STATE,
        "T: * : %d : %d 1" % (GOAL_STATE, GOAL_STATE),
        "O: * : %d : 20 1" % GOAL_STATE,
    ]
    actions = ["stay", "forward", "right", "left", "around"]
    for s, a in itertools.product(range(GOAL_STATE), range(5)):
        row = transitions(s, a)
        for t in sorted(row):
            lines.append("T: %s : %d : %d %.17g" % (actions[a], s, t, row[t]))
        if GOAL_STATE in row:
            lines.append("R: %s : %d %.17g" % (actions[a], s, row[GOAL_STATE]))
    for s in range(GOAL_STATE):
        obs = observations(s)
        for z in sorted(obs):
            lines.append("O: * : %d : %d %.17g" % (s, z, obs[z]))
    pathlib.Path(args.out).write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
