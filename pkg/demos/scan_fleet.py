# %% [markdown]
# # Scanning a fleet of login deployments
#
# Start the 29 simulated sites, describe them as a target collection and run
# the scanner over all of them. The printed table has one row per site.

# %%
import time

from w3authkit import Policy, Scanner, SimServer, fixture_table2, load_targets
from w3authkit.report import reports_to_markdown
from w3authkit.vulnsim import target_document

profiles = fixture_table2()
sim = SimServer(profiles).start()
targets = load_targets(target_document(profiles, sim.root_url))
print(len(targets), "targets served at", sim.root_url)

# %% [markdown]
# Loopback hosts get no pause between requests, so the whole fleet takes a
# few seconds. Against a real site the default is one request a minute.

# %%
scanner = Scanner(Policy(timeout=5), seed=0)
t0 = time.monotonic()
reports = [scanner.scan(t) for t in targets]
print(f"scanned in {time.monotonic() - t0:.1f} s, {scanner.requests} requests")

# %%
print(reports_to_markdown(reports, [t.meta for t in targets]))

# %% [markdown]
# Look at one finding in detail. The evidence lists every probe with its
# outcome, which is what the verdicts were derived from.

# %%
galler = next(r for r in reports if r.label == "galler")
for name, verdict in galler.finding.verdicts()["server_checks"].items():
    print(f"{name:10} {verdict}")
for e in galler.finding.evidence[:6]:
    print(e.probe, e.outcome.value, e.status, e.note)

# %%
sim.stop()
