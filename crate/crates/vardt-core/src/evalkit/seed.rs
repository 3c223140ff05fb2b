//! Built-in seeded-bug corpus: twenty-two small defects, each shipped with a
//! reference fix, a test suite that the buggy version fails, and the fault
//! variables a localizer should surface. The truth files cite lines of the
//! buggy program and tag each variable with the rule that justified it:
//!
//! 1. the variable is directly modified, replaced, deleted, or inserted by
//!    the fix;
//! 2. the variable's value is affected by a newly inserted statement, such
//!    as a guard wrapped around its assignment;
//! 3. the fix inserts or deletes a data-flow-breaking statement (a return)
//!    inside an existing branch, implicating the branch condition's
//!    temporary;
//! 4. the fix rewrites or deletes a whole branch, implicating the
//!    condition's temporary.

use crate::evalkit::corpus::{parse_truth, CorpusBug};

struct Seed {
    id: &'static str,
    buggy: &'static str,
    fixed: &'static str,
    tests: &'static str,
    truth: &'static str,
    notes: &'static str,
    patches: Option<&'static str>,
}

pub fn seed_corpus() -> Vec<CorpusBug> {
    SEEDS
        .iter()
        .map(|s| CorpusBug {
            id: s.id.to_string(),
            buggy: s.buggy.to_string(),
            fixed: s.fixed.to_string(),
            tests: s.tests.to_string(),
            truth: parse_truth(s.id, s.truth).expect("seed truth parses"),
            notes: s.notes.to_string(),
            patches: s.patches.map(str::to_string),
        })
        .collect()
}

const SEEDS: &[Seed] = &[
    Seed {
        id: "bug01-mantissa-exp-bound",
        buggy: r#"// converts a numeric string to its mantissa form
method createNumber(str) {
    decPos = indexOf(str, ".");
    expPos = indexOf(str, "e") + indexOf(str, "E") + 1;
    hasExp = expPos > 0;
    if (decPos > -1) {
        if (expPos > -1) {
            if (expPos < decPos) {
                throw "not a valid number";
            }
            dec = substring(str, decPos + 1, expPos);
        } else {
            dec = substring(str, decPos + 1, length(str));
        }
        mant = substring(str, 0, decPos);
    } else {
        if (expPos > -1) {
            mant = substring(str, 0, expPos);
        } else {
            mant = str;
        }
    }
    return mant;
}
"#,
        fixed: r#"// converts a numeric string to its mantissa form
method createNumber(str) {
    decPos = indexOf(str, ".");
    expPos = indexOf(str, "e") + indexOf(str, "E") + 1;
    hasExp = expPos > 0;
    if (decPos > -1) {
        if (expPos > -1) {
            if (expPos < decPos) {
                throw "not a valid number";
            }
            dec = substring(str, decPos + 1, expPos);
        } else {
            dec = substring(str, decPos + 1, length(str));
        }
        mant = substring(str, 0, decPos);
    } else {
        if (expPos > -1) {
            if (expPos < length(str)) {
                mant = substring(str, 0, expPos);
            } else {
                return "invalid";
            }
        } else {
            mant = str;
        }
    }
    return mant;
}
"#,
        tests: r#"test t1 {
    assert createNumber("1l") == "1l";
}
test t2 {
    assert createNumber("1111 ") == "1111 ";
}
test t3 {
    assert createNumber("-1.1E200") == "-1";
}
test t4 {
    assert createNumber("1eE") == "invalid";
}
"#,
        truth: "VAR expPos LINES 4,17,18 RULE 1\nVAR length(str) LINES 18 RULE 1\n",
        notes: "The exponent marker position is trusted as a substring bound without \
checking it against the string length, so an exponent marker in the last \
position slices past the end. The fix guards the slice with the string \
length and rejects the input otherwise.\n",
        patches: Some(
            r#"PATCH p1 LABEL correct
METHOD createNumber
- 17 if (expPos > -1) {
+ if (expPos > -1 && expPos < length(str)) {

PATCH p2 LABEL incorrect
METHOD createNumber
- 18 mant = substring(str, 0, expPos);
+ mant = substring(str, 1, expPos);

PATCH p3 LABEL incorrect
METHOD createNumber
- 3 decPos = indexOf(str, ".");
+ decPos = indexOf(str, ",");

PATCH p4 LABEL incorrect
METHOD createNumber
- 9 throw "not a valid number";
+ throw "bad";

PATCH p5 LABEL incorrect
METHOD createNumber
- 23 return mant;
+ return str;

PATCH p6 LABEL correct
METHOD createNumber
- 18 mant = substring(str, 0, expPos);
+ if (expPos < length(str)) {
+     mant = substring(str, 0, expPos);
+ } else {
+     return "invalid";
+ }
"#,
        ),
    },
    Seed {
        id: "bug02-discount-boundary",
        buggy: r#"method discount(price, qty) {
    rate = 0;
    bulk = qty * price;
    audit = bulk + qty;
    audit = audit * 2;
    if (qty > 3) {
        rate = 10;
    }
    if (price > 100) {
        rate = rate + 5;
    }
    return price - rate;
}
"#,
        fixed: r#"method discount(price, qty) {
    rate = 0;
    bulk = qty * price;
    audit = bulk + qty;
    audit = audit * 2;
    if (qty >= 3) {
        rate = 10;
    }
    if (price > 100) {
        rate = rate + 5;
    }
    return price - rate;
}
"#,
        tests: r#"test t1 {
    assert discount(50, 3) == 40;
}
test t2 {
    assert discount(50, 5) == 40;
}
test t3 {
    assert discount(50, 1) == 50;
}
test t4 {
    assert discount(200, 4) == 185;
}
test t5 {
    assert discount(200, 2) == 195;
}
"#,
        truth: "VAR qty LINES 6 RULE 1\nVAR __tdiscount_1 LINES 6 RULE 1\n",
        notes: "The bulk-discount threshold uses a strict comparison, so a quantity \
of exactly three misses the rebate it should earn. The fix relaxes the \
comparison to greater-or-equal.\n",
        patches: Some(
            r#"PATCH p1 LABEL correct
METHOD discount
- 6 if (qty > 3) {
+ if (qty >= 3) {

PATCH p2 LABEL incorrect
METHOD discount
- 10 rate = rate + 5;
+ rate = rate + 6;

PATCH p3 LABEL incorrect
METHOD discount
- 2 rate = 0;
+ rate = 1;

PATCH p4 LABEL incorrect
METHOD discount
- 5 audit = audit * 2;
+ audit = audit * 3;
"#,
        ),
    },
    Seed {
        id: "bug03-max-init",
        buggy: r#"method maxOf(items) {
    n = length(items);
    checked = 0;
    best = 0;
    i = 0;
    while (i < n) {
        v = items[i];
        checked = checked + 1;
        if (v > best) {
            best = v;
        }
        i = i + 1;
    }
    return best;
}
"#,
        fixed: r#"method maxOf(items) {
    n = length(items);
    checked = 0;
    best = items[0];
    i = 0;
    while (i < n) {
        v = items[i];
        checked = checked + 1;
        if (v > best) {
            best = v;
        }
        i = i + 1;
    }
    return best;
}
"#,
        tests: r#"test t1 {
    assert maxOf([-5, -2, -9]) == -2;
}
test t2 {
    assert maxOf([3, 9, 4]) == 9;
}
test t3 {
    assert maxOf([7]) == 7;
}
test t4 {
    assert maxOf([0, -1]) == 0;
}
test t5 {
    assert maxOf([2, 12, 5, 12]) == 12;
}
"#,
        truth: "VAR best LINES 4,10 RULE 1\nVAR items LINES 2,7 RULE 1\n",
        notes: "The running maximum starts at zero instead of the first element, so \
any all-negative input reports zero. The fix seeds the scan with the \
first element.\n",
        patches: None,
    },
    Seed {
        id: "bug04-div-guard",
        buggy: r#"method safeDiv(a, b) {
    total = a + b;
    total = total * 3;
    if (b == 0) {
        b = 1;
    }
    q = a / b;
    return q;
}
"#,
        fixed: r#"method safeDiv(a, b) {
    total = a + b;
    total = total * 3;
    if (b == 0) {
        return 0;
    }
    q = a / b;
    return q;
}
"#,
        tests: r#"test t1 {
    assert safeDiv(8, 0) == 0;
}
test t2 {
    assert safeDiv(8, 2) == 4;
}
test t3 {
    assert safeDiv(9, 3) == 3;
}
test t4 {
    assert safeDiv(0, 5) == 0;
}
"#,
        truth: "VAR __tsafeDiv_1 LINES 4 RULE 3\nVAR b LINES 4,5,7 RULE 1\n",
        notes: "A zero divisor is silently patched to one instead of short-circuiting, \
so division by zero quietly returns the dividend. The fix returns the \
zero sentinel from inside the guard.\n",
        patches: None,
    },
    Seed {
        id: "bug05-first-match-return",
        buggy: r#"method firstIndexOf(items, want) {
    probes = 0;
    hit = -1;
    i = 0;
    n = length(items);
    while (i < n) {
        probes = probes + 1;
        if (items[i] == want) {
            hit = i;
        }
        i = i + 1;
    }
    return hit;
}
"#,
        fixed: r#"method firstIndexOf(items, want) {
    probes = 0;
    hit = -1;
    i = 0;
    n = length(items);
    while (i < n) {
        probes = probes + 1;
        if (items[i] == want) {
            hit = i;
            return hit;
        }
        i = i + 1;
    }
    return hit;
}
"#,
        tests: r#"test t1 {
    assert firstIndexOf([4, 7, 4], 4) == 0;
}
test t2 {
    assert firstIndexOf([4, 7, 4], 7) == 1;
}
test t3 {
    assert firstIndexOf([1, 2, 3], 9) == -1;
}
test t4 {
    assert firstIndexOf([5], 5) == 0;
}
test t5 {
    assert firstIndexOf([2, 2], 9) == -1;
}
"#,
        truth: "VAR __tfirstIndexOf_2 LINES 8 RULE 3\n",
        notes: "The scan keeps running after a match and overwrites the hit with \
every later occurrence, returning the last index instead of the first. \
The fix returns as soon as the element matches.\n",
        patches: None,
    },
    Seed {
        id: "bug06-overspend-clamp",
        buggy: r#"method normalize(v, limit) {
    steps = 0;
    steps = steps + 1;
    while (v > limit) {
        v = v - limit;
        steps = steps + 1;
    }
    return v;
}
method budgetLeft(spent, cap) {
    margin = cap - spent;
    audit = margin * 2;
    if (margin < 0) {
        margin = 0 - margin;
    }
    n = normalize(margin, 10);
    return n;
}
"#,
        fixed: r#"method normalize(v, limit) {
    steps = 0;
    steps = steps + 1;
    while (v > limit) {
        v = v - limit;
        steps = steps + 1;
    }
    return v;
}
method budgetLeft(spent, cap) {
    margin = cap - spent;
    audit = margin * 2;
    if (margin < 0) {
        return 0;
    }
    n = normalize(margin, 10);
    return n;
}
"#,
        tests: r#"test t1 {
    assert budgetLeft(120, 100) == 0;
}
test t2 {
    assert budgetLeft(30, 100) == 10;
}
test t3 {
    assert budgetLeft(95, 100) == 5;
}
test t4 {
    assert budgetLeft(100, 100) == 0;
}
"#,
        truth: "VAR __tbudgetLeft_1 LINES 13 RULE 3\nVAR margin LINES 11,13,14,16 RULE 1\n",
        notes: "An overspent budget flips the margin's sign and reports the absolute \
value as money left over. The fix returns zero from the negative-margin \
branch instead of rectifying it.\n",
        patches: None,
    },
    Seed {
        id: "bug07-fee-grouping",
        buggy: r#"method fee(amount, days) {
    base = 40;
    log1 = amount + days;
    log2 = log1 * 2;
    late = amount * 5 + days;
    if (late > 100) {
        late = 100;
    }
    return base + late;
}
"#,
        fixed: r#"method fee(amount, days) {
    base = 40;
    log1 = amount + days;
    log2 = log1 * 2;
    late = amount * (5 + days);
    if (late > 100) {
        late = 100;
    }
    return base + late;
}
"#,
        tests: r#"test t1 {
    assert fee(2, 5) == 60;
}
test t2 {
    assert fee(10, 20) == 140;
}
test t3 {
    assert fee(20, 0) == 140;
}
test t4 {
    assert fee(0, 0) == 40;
}
test t5 {
    assert fee(30, 1) == 140;
}
"#,
        truth: "VAR late LINES 5,6,7,9 RULE 1\n",
        notes: "Missing parentheses make the late surcharge add the day count after \
multiplying instead of scaling the per-day rate, undercharging long \
delays. The fix groups the rate sum before multiplying.\n",
        patches: None,
    },
    Seed {
        id: "bug08-initials-cut",
        buggy: r#"method initials(first, second) {
    marker = length(first) + length(second);
    if (length(first) == 0) {
        return second;
    }
    cut = length(first) - 1;
    a = substring(first, 0, cut);
    b = substring(second, 0, 1);
    joined = a + b;
    return joined;
}
"#,
        fixed: r#"method initials(first, second) {
    marker = length(first) + length(second);
    if (length(first) == 0) {
        return second;
    }
    cut = 1;
    a = substring(first, 0, cut);
    b = substring(second, 0, 1);
    joined = a + b;
    return joined;
}
"#,
        tests: r#"test t1 {
    assert initials("ada", "lovelace") == "al";
}
test t2 {
    assert initials("jo", "march") == "jm";
}
test t3 {
    assert initials("", "grace") == "grace";
}
test t4 {
    assert initials("kay", "beta") == "kb";
}
test t5 {
    assert initials("al", "turing") == "at";
}
"#,
        truth: "VAR cut LINES 6,7 RULE 1\n",
        notes: "The first-name prefix length is derived from the name length instead \
of being the constant one, so anything longer than two characters leaks \
extra letters into the initials. The fix pins the cut to one.\n",
        patches: None,
    },
    Seed {
        id: "bug09-bonus-sign",
        buggy: r#"method adjust(score, bonus) {
    checksum = score + bonus;
    checksum = checksum + 7;
    score = score + bonus;
    if (score > 100) {
        score = 100;
    }
    return score;
}
"#,
        fixed: r#"method adjust(score, bonus) {
    checksum = score + bonus;
    checksum = checksum + 7;
    if (bonus > 0) {
        score = score + bonus;
    }
    if (score > 100) {
        score = 100;
    }
    return score;
}
"#,
        tests: r#"test t1 {
    assert adjust(50, -10) == 50;
}
test t2 {
    assert adjust(50, 10) == 60;
}
test t3 {
    assert adjust(95, 20) == 100;
}
test t4 {
    assert adjust(70, 0) == 70;
}
"#,
        truth: "VAR score LINES 4,5,8 RULE 2\nVAR bonus LINES 4 RULE 1\n",
        notes: "Bonuses are applied unconditionally, so a negative bonus deducts \
points even though only positive bonuses should count. The fix wraps \
the addition in a positivity guard.\n",
        patches: None,
    },
    Seed {
        id: "bug10-min-positive",
        buggy: r#"method minPositive(items) {
    n = length(items);
    scanned = 0;
    best = 1000;
    i = 0;
    while (i < n) {
        v = items[i];
        scanned = scanned + 1;
        if (v < best) {
            best = v;
        }
        i = i + 1;
    }
    return best;
}
"#,
        fixed: r#"method minPositive(items) {
    n = length(items);
    scanned = 0;
    best = 1000;
    i = 0;
    while (i < n) {
        v = items[i];
        scanned = scanned + 1;
        if (v < best) {
            if (v > 0) {
                best = v;
            }
        }
        i = i + 1;
    }
    return best;
}
"#,
        tests: r#"test t1 {
    assert minPositive([5, -3, 9]) == 5;
}
test t2 {
    assert minPositive([4, 2, 8]) == 2;
}
test t3 {
    assert minPositive([7]) == 7;
}
test t4 {
    assert minPositive([-1, -2]) == 1000;
}
test t5 {
    assert minPositive([3, 3]) == 3;
}
"#,
        truth: "VAR best LINES 4,9,10,14 RULE 2\nVAR v LINES 7,9,10 RULE 1\n",
        notes: "The minimum scan accepts any smaller value, letting negatives win \
even though the method promises the smallest positive entry. The fix \
only updates the best value when the candidate is positive.\n",
        patches: None,
    },
    Seed {
        id: "bug11-compact-copy",
        buggy: r#"method compact(items) {
    n = length(items);
    out = [0, 0, 0, 0];
    written = 0;
    audit = 0;
    i = 0;
    while (i < n) {
        v = items[i];
        audit = audit + v;
        out[written] = v;
        written = written + 1;
        i = i + 1;
    }
    return written;
}
"#,
        fixed: r#"method compact(items) {
    n = length(items);
    out = [0, 0, 0, 0];
    written = 0;
    audit = 0;
    i = 0;
    while (i < n) {
        v = items[i];
        audit = audit + v;
        if (v != 0) {
            out[written] = v;
            written = written + 1;
        }
        i = i + 1;
    }
    return written;
}
"#,
        tests: r#"test t1 {
    assert compact([3, 0, 5]) == 2;
}
test t2 {
    assert compact([1, 2]) == 2;
}
test t3 {
    assert compact([0, 0, 0, 0]) == 0;
}
test t4 {
    assert compact([9]) == 1;
}
test t5 {
    assert compact([]) == 0;
}
"#,
        truth: "VAR written LINES 4,10,11,14 RULE 2\nVAR out LINES 3,10 RULE 2\nVAR v LINES 8,10 RULE 1\n",
        notes: "Compaction copies every element, zeros included, so the written count \
equals the input length. The fix guards the copy and the counter bump \
behind a nonzero check.\n",
        patches: None,
    },
    Seed {
        id: "bug12-weight-rebate",
        buggy: r#"method shipping(weight, express) {
    fee = weight * 2;
    note = weight + 1;
    if (express) {
        fee = fee + 15;
    }
    if (weight > 30) {
        fee = fee - 5;
    }
    return fee;
}
"#,
        fixed: r#"method shipping(weight, express) {
    fee = weight * 2;
    note = weight + 1;
    if (express) {
        fee = fee + 15;
    }
    return fee;
}
"#,
        tests: r#"test t1 {
    assert shipping(40, false) == 80;
}
test t2 {
    assert shipping(10, false) == 20;
}
test t3 {
    assert shipping(10, true) == 35;
}
test t4 {
    assert shipping(35, true) == 85;
}
test t5 {
    assert shipping(30, false) == 60;
}
"#,
        truth: "VAR __tshipping_1 LINES 7 RULE 4\nVAR fee LINES 8 RULE 1\n",
        notes: "A leftover heavy-parcel rebate knocks five off anything over thirty \
units even though pricing dropped that discount. The fix deletes the \
whole branch.\n",
        patches: Some(
            r#"PATCH p1 LABEL correct
METHOD shipping
- 7 if (weight > 30) {
- 8 fee = fee - 5;
- 9 }

PATCH p2 LABEL incorrect
METHOD shipping
- 8 fee = fee - 5;
+ fee = fee - 4;

PATCH p3 LABEL incorrect
METHOD shipping
- 2 fee = weight * 2;
+ fee = weight * 3;

PATCH p4 LABEL incorrect
METHOD shipping
- 3 note = weight + 1;
+ note = weight + 2;

PATCH p5 LABEL incorrect
METHOD shipping
- 4 if (express) {
+ if (!express) {
"#,
        ),
    },
    Seed {
        id: "bug13-grade-tier",
        buggy: r#"method grade(points) {
    curve = points + 3;
    label = 0;
    if (points > 89) {
        label = 1;
    } else {
        if (points > 59) {
            label = 3;
        } else {
            label = 3;
        }
    }
    return label;
}
"#,
        fixed: r#"method grade(points) {
    curve = points + 3;
    label = 0;
    if (points > 89) {
        label = 1;
    } else {
        if (points > 59) {
            label = 2;
        } else {
            label = 3;
        }
    }
    return label;
}
"#,
        tests: r#"test t1 {
    assert grade(95) == 1;
}
test t2 {
    assert grade(70) == 2;
}
test t3 {
    assert grade(30) == 3;
}
test t4 {
    assert grade(60) == 2;
}
test t5 {
    assert grade(89) == 2;
}
"#,
        truth: "VAR __tgrade_2 LINES 7 RULE 4\nVAR label LINES 8 RULE 1\n",
        notes: "The middle grading tier assigns the bottom tier's label, collapsing \
passing and failing grades into one bucket. The fix writes the middle \
tier's own label in that branch.\n",
        patches: None,
    },
    Seed {
        id: "bug14-flag-length",
        buggy: r#"method parseFlag(text) {
    n = length(text);
    echo = n * 2;
    if (n == 0) {
        return 9;
    }
    c = charAt(text, 0);
    if (c == 121) {
        return 1;
    }
    if (c == 110) {
        return 0;
    }
    if (n > 3) {
        return 0;
    }
    return 9;
}
"#,
        fixed: r#"method parseFlag(text) {
    n = length(text);
    echo = n * 2;
    if (n == 0) {
        return 9;
    }
    c = charAt(text, 0);
    if (c == 121) {
        return 1;
    }
    if (c == 110) {
        return 0;
    }
    return 9;
}
"#,
        tests: r#"test t1 {
    assert parseFlag("maybe") == 9;
}
test t2 {
    assert parseFlag("yes") == 1;
}
test t3 {
    assert parseFlag("no") == 0;
}
test t4 {
    assert parseFlag("") == 9;
}
test t5 {
    assert parseFlag("nope") == 0;
}
"#,
        truth: "VAR __tparseFlag_4 LINES 14 RULE 4\n",
        notes: "Long inputs fall into a stale special case that treats any string \
over three characters as a negative flag instead of unknown. The fix \
removes that branch so unrecognized input reports the unknown code.\n",
        patches: None,
    },
    Seed {
        id: "bug15-trim-width",
        buggy: r#"method trim(code) {
    n = length(code);
    if (n < 4) {
        return code;
    }
    head = substring(code, 0, 4);
    return head;
}
method register(code, batch) {
    tag = trim(code);
    serial = batch * 1000;
    stamp = serial + 7;
    key = tag + "-";
    return key;
}
"#,
        fixed: r#"method trim(code) {
    n = length(code);
    if (n < 3) {
        return code;
    }
    head = substring(code, 0, 3);
    return head;
}
method register(code, batch) {
    tag = trim(code);
    serial = batch * 1000;
    stamp = serial + 7;
    key = tag + "-";
    return key;
}
"#,
        tests: r#"test t1 {
    assert register("ABCDE", 2) == "ABC-";
}
test t2 {
    assert register("XY", 1) == "XY-";
}
test t3 {
    assert trim("QRSTU") == "QRS";
}
test t4 {
    assert trim("AB") == "AB";
}
test t5 {
    assert register("ZZZZZ", 9) == "ZZZ-";
}
"#,
        truth: "VAR __ttrim_1 LINES 3 RULE 1\nVAR head LINES 6,7 RULE 1\n",
        notes: "Registration codes are trimmed to four characters although keys use \
three, so every long code produces an oversized key. The fix narrows \
both the short-circuit test and the slice to three.\n",
        patches: None,
    },
    Seed {
        id: "bug16-tax-rounding",
        buggy: r#"method rate(region) {
    if (region == 2) {
        return 19;
    }
    if (region == 1) {
        return 7;
    }
    return 0;
}
method round2(cents) {
    r = cents % 10;
    out = cents - r;
    if (r > 5) {
        out = out + 10;
    }
    return out;
}
method tax(amount, region) {
    pct = rate(region);
    memo = amount + pct;
    raw = amount * pct / 100;
    t = round2(raw);
    return t;
}
"#,
        fixed: r#"method rate(region) {
    if (region == 2) {
        return 19;
    }
    if (region == 1) {
        return 7;
    }
    return 0;
}
method round2(cents) {
    r = cents % 10;
    out = cents - r;
    if (r > 4) {
        out = out + 10;
    }
    return out;
}
method tax(amount, region) {
    pct = rate(region);
    memo = amount + pct;
    raw = amount * pct / 100;
    t = round2(raw);
    return t;
}
"#,
        tests: r#"test t1 {
    assert tax(500, 2) == 100;
}
test t2 {
    assert tax(300, 1) == 20;
}
test t3 {
    assert tax(100, 0) == 0;
}
test t4 {
    assert round2(47) == 50;
}
test t5 {
    assert round2(42) == 40;
}
test t6 {
    assert round2(45) == 50;
}
test t7 {
    assert rate(2) == 19;
}
"#,
        truth: "VAR __tround2_1 LINES 13 RULE 1\nVAR r LINES 11,13 RULE 1\n",
        notes: "Rounding to the nearest ten compares the remainder with a strict \
greater-than-five test, so exact fives round down instead of up. The \
fix lowers the threshold comparison to greater-than-four.\n",
        patches: None,
    },
    Seed {
        id: "bug17-parse-accumulate",
        buggy: r#"method digitVal(c) {
    if (c > 47) {
        if (c < 58) {
            return c - 48;
        }
    }
    return -1;
}
method parseInt(text) {
    n = length(text);
    seen = 0;
    acc = 0;
    i = 0;
    while (i < n) {
        c = charAt(text, i);
        d = digitVal(c);
        seen = seen + 1;
        if (d < 0) {
            return -1;
        }
        acc = acc * 10 + c;
        i = i + 1;
    }
    return acc;
}
"#,
        fixed: r#"method digitVal(c) {
    if (c > 47) {
        if (c < 58) {
            return c - 48;
        }
    }
    return -1;
}
method parseInt(text) {
    n = length(text);
    seen = 0;
    acc = 0;
    i = 0;
    while (i < n) {
        c = charAt(text, i);
        d = digitVal(c);
        seen = seen + 1;
        if (d < 0) {
            return -1;
        }
        acc = acc * 10 + d;
        i = i + 1;
    }
    return acc;
}
"#,
        tests: r#"test t1 {
    assert parseInt("72") == 72;
}
test t2 {
    assert parseInt("") == 0;
}
test t3 {
    assert parseInt("9x") == -1;
}
test t4 {
    assert parseInt("5") == 5;
}
test t5 {
    assert digitVal(53) == 5;
}
test t6 {
    assert digitVal(32) == -1;
}
"#,
        truth: "VAR acc LINES 12,21,24 RULE 1\nVAR c LINES 15,21 RULE 1\nVAR d LINES 16,18 RULE 1\n",
        notes: "The accumulator folds in the raw character code instead of the \
decoded digit, so every nonempty number comes out forty-eight-per-digit \
too high. The fix accumulates the decoded digit value.\n",
        patches: None,
    },
    Seed {
        id: "bug18-sum-bound",
        buggy: r#"method sumTo(n) {
    check = n * 3;
    total = 0;
    i = 1;
    while (i < n) {
        total = total + i;
        i = i + 1;
    }
    return total;
}
"#,
        fixed: r#"method sumTo(n) {
    check = n * 3;
    total = 0;
    i = 1;
    while (i <= n) {
        total = total + i;
        i = i + 1;
    }
    return total;
}
"#,
        tests: r#"test t1 {
    assert sumTo(4) == 10;
}
test t2 {
    assert sumTo(1) == 1;
}
test t3 {
    assert sumTo(0) == 0;
}
"#,
        truth: "VAR __tsumTo_1 LINES 5 RULE 1\nVAR n LINES 2,5 RULE 1\nVAR i LINES 5,6,7 RULE 1\n",
        notes: "The summation loop stops one short of the bound, returning the sum to \
n minus one. The fix makes the loop condition inclusive.\n",
        patches: None,
    },
    Seed {
        id: "bug19-swap-ends",
        buggy: r#"method swapEnds(items) {
    n = length(items);
    taps = n + 1;
    if (n < 2) {
        return items;
    }
    first = items[0];
    last = items[n - 1];
    items[0] = first;
    items[n - 1] = first;
    return items;
}
"#,
        fixed: r#"method swapEnds(items) {
    n = length(items);
    taps = n + 1;
    if (n < 2) {
        return items;
    }
    first = items[0];
    last = items[n - 1];
    items[0] = last;
    items[n - 1] = first;
    return items;
}
"#,
        tests: r#"test t1 {
    assert swapEnds([1, 2, 3]) == [3, 2, 1];
}
test t2 {
    assert swapEnds([5]) == [5];
}
test t3 {
    assert swapEnds([]) == [];
}
test t4 {
    assert swapEnds([7, 7]) == [7, 7];
}
test t5 {
    assert swapEnds([4, 9]) == [9, 4];
}
"#,
        truth: "VAR last LINES 8 RULE 1\nVAR first LINES 7,9,10 RULE 1\nVAR items LINES 2,7,8,9,10,11 RULE 1\nVAR items[0] LINES 9 RULE 1\n",
        notes: "The end swap writes the first element into both slots, leaving the \
saved last element unused. The fix stores the saved last element at the \
front.\n",
        patches: None,
    },
    Seed {
        id: "bug20-vip-label",
        buggy: r#"method label(name, vip) {
    pad = length(name) + 2;
    tag = "guest";
    tag = "vip";
    if (length(name) == 0) {
        tag = "anon";
    }
    return tag;
}
"#,
        fixed: r#"method label(name, vip) {
    pad = length(name) + 2;
    tag = "guest";
    if (vip) {
        tag = "vip";
    }
    if (length(name) == 0) {
        tag = "anon";
    }
    return tag;
}
"#,
        tests: r#"test t1 {
    assert label("bo", false) == "guest";
}
test t2 {
    assert label("al", true) == "vip";
}
test t3 {
    assert label("", false) == "anon";
}
test t4 {
    assert label("cy", true) == "vip";
}
"#,
        truth: "VAR tag LINES 3,4,6,8 RULE 2\nVAR vip LINES 1 RULE 1\n",
        notes: "Everyone is tagged as a vip because the upgrade overwrites the guest \
tag unconditionally. The fix wraps the upgrade in the vip-flag guard.\n",
        patches: None,
    },
    Seed {
        id: "bug21-drain-step",
        buggy: r#"method drain(tank, step) {
    audit = tank * 2;
    ticks = 0;
    level = tank;
    while (level > 0) {
        level = level - step;
        ticks = ticks + 1;
    }
    return ticks;
}
"#,
        fixed: r#"method drain(tank, step) {
    audit = tank * 2;
    if (step < 1) {
        return -1;
    }
    ticks = 0;
    level = tank;
    while (level > 0) {
        level = level - step;
        ticks = ticks + 1;
    }
    return ticks;
}
"#,
        tests: r#"test t1 {
    assert drain(10, 0) == -1;
}
test t2 {
    assert drain(10, 3) == 4;
}
test t3 {
    assert drain(0, 5) == 0;
}
test t4 {
    assert drain(9, 9) == 1;
}
"#,
        truth: "VAR step LINES 1,6 RULE 1\n",
        notes: "A zero step never lowers the level, so the drain loop spins forever \
and the run dies on the execution budget. The fix rejects non-positive \
steps up front.\n",
        patches: None,
    },
    Seed {
        id: "bug22-cipher-key",
        buggy: r#"method shift(c, k) {
    r = c + k;
    if (r > 122) {
        r = r - 26;
    }
    return r;
}
method encode(text, k) {
    n = length(text);
    total = 0;
    pad = n * 7;
    i = 0;
    while (i < n) {
        c = charAt(text, i);
        s = shift(c, i);
        total = total + s;
        i = i + 1;
    }
    return total;
}
"#,
        fixed: r#"method shift(c, k) {
    r = c + k;
    if (r > 122) {
        r = r - 26;
    }
    return r;
}
method encode(text, k) {
    n = length(text);
    total = 0;
    pad = n * 7;
    i = 0;
    while (i < n) {
        c = charAt(text, i);
        s = shift(c, k);
        total = total + s;
        i = i + 1;
    }
    return total;
}
"#,
        tests: r#"test t1 {
    assert encode("ab", 1) == 197;
}
test t2 {
    assert encode("", 5) == 0;
}
test t3 {
    assert encode("z", 3) == 99;
}
test t4 {
    assert shift(100, 2) == 102;
}
test t5 {
    assert encode("m", 0) == 109;
}
"#,
        truth: "VAR i LINES 12,13,14,15,17 RULE 1\nVAR k LINES 8 RULE 1\n",
        notes: "The encoder shifts each character by the loop index instead of the \
key, so only positions that happen to equal the key encode correctly. \
The fix passes the key through to the shift.\n",
        patches: None,
    },
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::corpus::validate_bug;
    use crate::lang::parse_program;
    use std::collections::BTreeSet;

    #[test]
    fn every_seed_fails_buggy_and_passes_fixed() {
        for bug in seed_corpus() {
            if let Err(e) = validate_bug(&bug) {
                panic!("{e}");
            }
        }
    }

    #[test]
    fn ids_are_unique_and_sorted() {
        let ids: Vec<&str> = SEEDS.iter().map(|s| s.id).collect();
        let set: BTreeSet<&str> = ids.iter().copied().collect();
        assert_eq!(set.len(), ids.len());
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(ids, sorted);
        assert_eq!(ids.len(), 22);
    }

    #[test]
    fn rule_coverage_spans_all_four_rules() {
        let mut by_rule = [0usize; 5];
        for bug in seed_corpus() {
            let rules: BTreeSet<u8> = bug.truth.vars.iter().map(|v| v.rule).collect();
            for r in rules {
                by_rule[r as usize] += 1;
            }
        }
        for rule in 1..=4 {
            assert!(
                by_rule[rule] >= 3,
                "rule {rule} appears in only {} bugs",
                by_rule[rule]
            );
        }
    }

    #[test]
    fn corpus_has_multi_var_and_multi_method_diversity() {
        let bugs = seed_corpus();
        let multi_var = bugs.iter().filter(|b| b.truth.vars.len() >= 2).count();
        assert!(multi_var >= 5, "only {multi_var} multi-variable bugs");
        let multi_method = bugs
            .iter()
            .filter(|b| parse_program(&b.buggy).unwrap().methods.len() >= 2)
            .count();
        assert!(multi_method >= 3, "only {multi_method} multi-method bugs");
        let with_patches = bugs.iter().filter(|b| b.patches.is_some()).count();
        assert!(with_patches >= 3, "only {with_patches} bugs carry patches");
    }

    #[test]
    fn truth_lines_exist_in_the_buggy_source() {
        for bug in seed_corpus() {
            let line_count = bug.buggy.lines().count() as u32;
            for v in &bug.truth.vars {
                for &l in &v.lines {
                    assert!(
                        l >= 1 && l <= line_count,
                        "{}: truth line {l} for {} outside 1..={line_count}",
                        bug.id,
                        v.name
                    );
                }
            }
        }
    }
}
