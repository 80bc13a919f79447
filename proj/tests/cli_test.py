"""Exercises the CLI: key/ciphertext round trips and exit codes."""
import json
import os
import subprocess
import sys

cli, workdir = sys.argv[1:3]
os.makedirs(workdir, exist_ok=True)
failures = []


def run(*args):
    return subprocess.run([cli, *args], capture_output=True, text=True)


def expect(label, proc, code):
    if proc.returncode != code:
        failures.append(f"{label}: exit {proc.returncode}, expected {code}\n{proc.stderr}")
    else:
        print(f"ok {label}")


def path(name):
    return os.path.join(workdir, name)


for family in ("injective", "exact", "lattice"):
    sk, pk = path(family + "_sk.json"), path(family + "_pk.json")
    expect(f"keygen {family}", run("keygen", "--family", family, "--n", "8", "--seed", "11", "--out", sk, "--public-out", pk), 0)
    schemes = [("deniable", [])] + ([("unexp", ["--L", "3", "--oracle-seed", "5"])] if family != "injective" else [])
    for scheme, extra in schemes:
        for m in (0, 1):
            ct = path(f"{family}_{scheme}_{m}.json")
            enc_key = sk if family == "lattice" else pk
            expect(f"encrypt {family} {scheme} m={m}",
                   run("encrypt", "--key", enc_key, "--scheme", scheme, "--m", str(m), "--seed", str(100 + m), *extra, "--out", ct), 0)
            dec_extra = ["--oracle-seed", "5"] if scheme == "unexp" else []
            proc = run("decrypt", "--key", sk, "--in", ct, *dec_extra)
            if family == "injective":
                # No claws: decryption must refuse.
                expect(f"decrypt {family} {scheme} m={m} refused", proc, 1)
                if proc.returncode == 1 and json.loads(proc.stdout)["m"] is not None:
                    failures.append("injective decryption returned a bit")
                continue
            expect(f"decrypt {family} {scheme} m={m}", proc, 0)
            if proc.returncode == 0 and json.loads(proc.stdout)["m"] != m:
                failures.append(f"decrypt {family} {scheme}: got {proc.stdout.strip()}, expected {m}")

# A wrong hash makes some repetition disagree with high probability over L=16.
ct = path("exact_unexp_wide.json")
run("encrypt", "--key", path("exact_pk.json"), "--scheme", "unexp", "--L", "16", "--m", "1", "--seed", "3", "--oracle-seed", "5", "--out", ct)
expect("decrypt with wrong oracle", run("decrypt", "--key", path("exact_sk.json"), "--in", ct, "--oracle-seed", "6"), 1)

bad_cfg = path("bad_config.json")
with open(bad_cfg, "w") as f:
    json.dump({"seed": 1, "bogus": 3}, f)
good_cfg = path("good_config.json")
with open(good_cfg, "w") as f:
    json.dump({"seed": 3, "trials": 20}, f)

expect("missing seed", run("distances"), 2)
expect("unknown config field", run("distances", "--config", bad_cfg), 2)
expect("unknown subcommand", run("frobnicate"), 2)
expect("bad strategy", run("extract-claw", "--seed", "1", "--strategy", "psychic", "--trials", "5"), 2)
expect("bad profile", run("distances", "--seed", "1", "--profile", "slow"), 2)
expect("lattice encryption from public key", run("encrypt", "--key", path("lattice_pk.json"), "--m", "0", "--seed", "1"), 2)
expect("unexp without oracle seed", run("encrypt", "--key", path("exact_pk.json"), "--scheme", "unexp", "--m", "0", "--seed", "1"), 2)
expect("config file", run("run", "distances", "--config", good_cfg, "--out", path("cfg_report.json")), 0)
expect("check-lemma bound", run("check-lemma", "bound", "--seed", "2", "--L", "3", "--trials", "10", "--out", path("bound.json")), 0)
expect("check-lemma clean", run("check-lemma", "clean", "--seed", "2", "--trials", "3", "--out", path("clean.json")), 0)

if failures:
    print("\n".join(failures))
    sys.exit(1)
