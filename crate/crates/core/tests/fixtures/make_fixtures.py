"""Regenerates the XML scenario fixtures. Output is deterministic."""
import math
import os

HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")


def offset(center, d):
    out = []
    for i, (x, y) in enumerate(center):
        a = center[max(i - 1, 0)]
        b = center[min(i + 1, len(center) - 1)]
        tx, ty = b[0] - a[0], b[1] - a[1]
        n = math.hypot(tx, ty)
        out.append((x - ty / n * d, y + tx / n * d))
    return out


def line(p, q, n=2):
    return [(p[0] + (q[0] - p[0]) * k / (n - 1), p[1] + (q[1] - p[1]) * k / (n - 1)) for k in range(n)]


class Lanelet:
    def __init__(self, lid, center, half=1.75):
        self.id = lid
        self.center = center
        self.left = offset(center, half)
        self.right = offset(center, -half)
        self.pred, self.succ = [], []
        self.adj_left = self.adj_right = None


def along(path, s):
    for a, b in zip(path, path[1:]):
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        if s <= seg:
            t = s / seg
            return (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t), math.atan2(b[1] - a[1], b[0] - a[0])
        s -= seg
    a, b = path[-2], path[-1]
    return b, math.atan2(b[1] - a[1], b[0] - a[0])


def fmt(v):
    return f"{v:.4f}".rstrip("0").rstrip(".") if v != 0 else "0"


def write(name, bid, dt, lanelets, vehicles):
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<commonRoad commonRoadVersion="2020a" benchmarkID="{bid}" date="2024-01-01" timeStepSize="{dt}">']
    for l in lanelets:
        out.append(f'  <lanelet id="{l.id}">')
        for tag, pts in (("leftBound", l.left), ("rightBound", l.right)):
            out.append(f"    <{tag}>")
            for x, y in pts:
                out.append(f"      <point><x>{fmt(x)}</x><y>{fmt(y)}</y></point>")
            out.append(f"      <lineMarking>dashed</lineMarking>")
            out.append(f"    </{tag}>")
        for p in l.pred:
            out.append(f'    <predecessor ref="{p}"/>')
        for s in l.succ:
            out.append(f'    <successor ref="{s}"/>')
        if l.adj_left:
            out.append(f'    <adjacentLeft ref="{l.adj_left}" drivingDir="same"/>')
        if l.adj_right:
            out.append(f'    <adjacentRight ref="{l.adj_right}" drivingDir="same"/>')
        out.append("    <laneletType>highway</laneletType>")
        out.append("  </lanelet>")
    for vid, path, s0, v, t0, t1, lat, with_acc, length, width in vehicles:
        out.append(f'  <dynamicObstacle id="{vid}">')
        out.append("    <type>car</type>")
        out.append(f"    <shape><rectangle><length>{length}</length><width>{width}</width></rectangle></shape>")
        states = []
        for t in range(t0, t1 + 1):
            speed = v + 0.5 * math.sin(0.3 * t + vid)
            s = s0 + sum(v + 0.5 * math.sin(0.3 * k + vid) for k in range(t0, t)) * dt
            (x, y), th = along(path, s)
            x, y = x - math.sin(th) * lat, y + math.cos(th) * lat
            states.append((t, x, y, th, speed))
        for i, (t, x, y, th, speed) in enumerate(states):
            tag = "initialState" if i == 0 else "state"
            if i == 1:
                out.append("    <trajectory>")
            out.append(f"    <{tag}>")
            out.append(f"      <position><point><x>{fmt(x)}</x><y>{fmt(y)}</y></point></position>")
            out.append(f"      <orientation><exact>{fmt(th)}</exact></orientation>")
            out.append(f"      <time><exact>{t}</exact></time>")
            out.append(f"      <velocity><exact>{fmt(speed)}</exact></velocity>")
            if with_acc:
                acc = 0.5 * 0.3 * math.cos(0.3 * t + vid)
                out.append(f"      <acceleration><exact>{fmt(acc)}</exact></acceleration>")
            out.append(f"    </{tag}>")
        if len(states) > 1:
            out.append("    </trajectory>")
        out.append("  </dynamicObstacle>")
    out.append('  <planningProblem id="900"/>')
    out.append("</commonRoad>")
    with open(os.path.join(HERE, name), "w") as f:
        f.write("\n".join(out) + "\n")


def highway():
    lanes = {}
    for k, y in enumerate((0.0, 3.5, 7.0)):
        lanes[10 + k] = Lanelet(10 + k, line((0, y), (60, y), 4))
        lanes[20 + k] = Lanelet(20 + k, line((60, y), (120, y), 5))
    ramp = [(0.0, -14.0), (15.0, -12.5), (30.0, -9.0), (45.0, -5.0), (60.0, -3.5)]
    lanes[30] = Lanelet(30, ramp)
    lanes[31] = Lanelet(31, line((60, -3.5), (120, -3.5), 3))
    exit_ = [(60.0, 7.0)] + [(60 + 60 * k / 6, 7.0 + 14 * (k / 6) ** 2) for k in range(1, 7)]
    lanes[40] = Lanelet(40, exit_)
    for k in range(3):
        a, b = lanes[10 + k], lanes[20 + k]
        a.succ.append(b.id)
        b.pred.append(a.id)
        if k < 2:
            a.adj_left, b.adj_left = 11 + k, 21 + k
        if k > 0:
            a.adj_right, b.adj_right = 9 + k, 19 + k
    lanes[30].succ += [31, 20]
    lanes[20].pred.append(30)
    lanes[31].pred.append(30)
    lanes[31].adj_left = 20
    lanes[20].adj_right = 31
    lanes[12].succ.append(40)
    lanes[40].pred.append(12)

    def path(*ids):
        pts = []
        for i in ids:
            c = lanes[i].center
            pts += c if not pts else c[1:]
        return pts

    vehicles = [
        (101, path(10, 20), 2.0, 24.0, 0, 19, 0.1, True, 4.5, 1.8),
        (102, path(10, 20), 18.0, 22.0, 0, 19, -0.2, False, 4.8, 1.9),
        (103, path(11, 21), 5.0, 27.0, 0, 19, 0.0, True, 4.2, 1.8),
        (104, path(11, 21), 30.0, 25.0, 0, 19, 0.3, False, 4.6, 1.8),
        (105, path(12, 22), 0.0, 29.0, 0, 19, -0.1, True, 4.4, 1.7),
        (106, path(12, 40), 22.0, 20.0, 0, 19, 0.0, False, 5.2, 2.0),
        (107, path(30, 31), 3.0, 18.0, 0, 19, 0.0, True, 4.5, 1.8),
        (108, path(30, 20), 25.0, 17.0, 0, 14, 0.1, False, 4.5, 1.8),
        (109, path(10, 20), 45.0, 21.0, 4, 19, 0.2, True, 4.5, 1.8),
        (110, path(11, 21), 55.0, 23.0, 0, 11, -0.3, False, 12.0, 2.5),
        (111, path(12, 22), 40.0, 26.0, 6, 19, 0.0, True, 4.5, 1.8),
        (112, path(22,), 20.0, 28.0, 0, 19, 0.8, False, 4.5, 1.8),
    ]
    write("highway_merge.xml", "FIX_HWY-1_1_T-1", 0.1, [lanes[k] for k in sorted(lanes)], vehicles)


def intersection():
    lanes = {
        1: Lanelet(1, line((-3.5, -40), (-3.5, -8), 3)),
        2: Lanelet(2, line((-3.5, -8), (-3.5, 8), 2)),
        3: Lanelet(3, line((-3.5, 8), (-3.5, 40), 3)),
        4: Lanelet(4, line((-40, 3.5), (-8, 3.5), 3)),
        5: Lanelet(5, line((-8, 3.5), (8, 3.5), 2)),
        6: Lanelet(6, line((8, 3.5), (40, 3.5), 3)),
    }
    for a, b in ((1, 2), (2, 3), (4, 5), (5, 6)):
        lanes[a].succ.append(b)
        lanes[b].pred.append(a)
    # right turn from the southern approach onto the eastern exit
    lanes[7] = Lanelet(7, [(-3.5 + 11.5 * (1 - math.cos(k * math.pi / 10)), -8 + 11.5 * math.sin(k * math.pi / 10))
                           for k in range(6)])
    lanes[1].succ.append(7)
    lanes[7].pred.append(1)
    lanes[7].succ.append(6)
    lanes[6].pred.append(7)

    def path(*ids):
        pts = []
        for i in ids:
            c = lanes[i].center
            pts += c if not pts else c[1:]
        return pts

    vehicles = [
        (201, path(1, 2, 3), 0.0, 12.0, 0, 24, 0.0, True, 4.5, 1.8),
        (202, path(1, 2, 3), 14.0, 11.0, 0, 24, 0.2, False, 4.5, 1.8),
        (203, path(4, 5, 6), 2.0, 13.0, 0, 24, 0.0, True, 4.5, 1.8),
        (204, path(4, 5, 6), 20.0, 10.0, 0, 24, -0.2, False, 4.5, 1.8),
        (205, path(1, 7, 6), 6.0, 8.0, 0, 24, 0.0, True, 4.5, 1.8),
        (206, path(4, 5, 6), 35.0, 9.0, 3, 24, 0.1, False, 4.5, 1.8),
        (207, path(1, 2, 3), 30.0, 0.0, 0, 24, 0.0, True, 4.5, 1.8),
        (208, path(1, 2, 3), 45.0, 12.5, 0, 17, -0.1, False, 4.5, 1.8),
        (209, path(4, 5, 6), 50.0, 11.0, 5, 24, 0.0, True, 4.5, 1.8),
        (210, path(1, 7, 6), 0.5, 7.0, 8, 24, 0.0, False, 4.5, 1.8),
    ]
    write("urban_crossing.xml", "FIX_URB-2_1_T-1", 0.2, [lanes[k] for k in sorted(lanes)], vehicles)


def rural():
    center = [(0.0, 0.0), (12.0, 1.0), (24.0, 4.0), (36.0, 4.5), (50.0, 2.0)]
    a = Lanelet(1, center, half=1.6)
    b = Lanelet(2, [(50.0, 2.0), (58.0, 0.5), (66.0, 0.0)], half=1.6)
    a.succ.append(2)
    b.pred.append(1)
    path = center + b.center[1:]
    vehicles = [
        (301, path, 0.0, 14.0, 0, 15, 0.0, True, 4.5, 1.8),
        (302, path, 20.0, 12.0, 0, 15, 0.1, False, 4.5, 1.8),
        (303, path, 40.0, 9.0, 2, 15, 0.0, True, 6.0, 2.2),
        (304, path, 8.0, 13.0, 5, 15, -0.1, False, 4.5, 1.8),
    ]
    write("rural_sparse.xml", "FIX_RUR-3_1_T-1", 0.1, [a, b], vehicles)


if __name__ == "__main__":
    os.makedirs(HERE, exist_ok=True)
    highway()
    intersection()
    rural()
