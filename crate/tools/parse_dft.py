import re, math, sys

text = open('/root/crate/paper.md').read()
start = text.index('TP_{D1}')
end = text.index('Supplementary Table 2.', start)
region = text[start:end]

tag_re = re.compile(r'TP_?\{?D(\d+)\}?')
num_re = re.compile(r'-?\d{1,3}(?:,\d{3})+|-?\d{3,}')

def ok(w, a, b):
    if w <= 0 or b < 0: return False
    wh = math.hypot(a, b)
    return abs(wh - w) / w <= 0.01

rows = []          # (group, w, a, b, recovered_flag)
panel_group = [None, None]   # left, right
unparsed = []

for lineno, line in enumerate(region.splitlines()):
    if not line.strip(): continue
    # tokens in order: ('G', id) or ('N', val)
    toks = []
    for m in re.finditer(r'TP_?\{?D(\d+)\}?|(-?\d{1,3}(?:,\d{3})+|-?\d+)', line):
        if m.group(1): toks.append(('G', int(m.group(1))))
        else: toks.append(('N', int(m.group(2).replace(',', ''))))
    slot = 0
    pending_tag = None
    i = 0
    nums = []  # flatten with tag markers handled inline
    while i < len(toks):
        t = toks[i]
        if t[0] == 'G':
            pending_tag = t[1]
            i += 1
            continue
        # try full triple
        if i + 2 < len(toks) and toks[i+1][0] == 'N' and toks[i+2][0] == 'N':
            w, a, b = toks[i][1], toks[i+1][1], toks[i+2][1]
            if ok(w, a, b):
                if pending_tag is not None:
                    panel_group[min(slot,1)] = pending_tag
                    pending_tag = None
                rows.append((panel_group[min(slot,1)], w, a, b, False))
                slot += 1
                i += 3
                continue
        # try recovery (missing b)
        if i + 1 < len(toks) and toks[i+1][0] == 'N':
            w, a = toks[i][1], toks[i+1][1]
            if w > 0 and abs(a) < w:
                b_hat = math.sqrt(w*w - a*a)
                b_round = round(b_hat / 100.0) * 100
                if ok(w, a, b_round):
                    if pending_tag is not None:
                        panel_group[min(slot,1)] = pending_tag
                        pending_tag = None
                    rows.append((panel_group[min(slot,1)], w, a, b_round, True))
                    slot += 1
                    i += 2
                    continue
        unparsed.append((lineno, line.strip()[:90], toks[i]))
        i += 1

print(f'rows={len(rows)} recovered={sum(1 for r in rows if r[4])}')
from collections import Counter
c = Counter(g for g, *_ in rows)
print('groups:', sorted((k, v) for k, v in c.items()))
print('--- unparsed tokens ---')
for u in unparsed: print(u)
with open('/root/crate/tools/dft_raw.tsv', 'w') as f:
    for g, w, a, b, rec in rows:
        mark = '\t*' if rec else ''
        f.write(f'D{g}\t{w}\t{a}\t{b}{mark}\n')
