# %% [markdown]
# # Wallet-side guard
#
# The guard learns a template from each site's login messages. A signature
# request on a different origin that matches a known template raises a red
# alert. A request that does not mention its own origin raises a yellow one.

# %%
from collections import Counter

from w3authkit.guard import attack_message, build_store, guard_corpus

sites = guard_corpus(seed=0)
store = build_store(sites)
print(len(store), "templates,", len(store.to_json().encode()), "bytes")
print(store.get("opensea.io").render())

# %% [markdown]
# Replay each site's test messages from a phishing origin, verbatim and then
# wrapped in the attacker's own text.

# %%
for embed in (False, True):
    caught = Counter()
    for s in sites:
        reds = sum(store.check(attack_message(s, m, embed), "evil.example").red is not None for m in s.test)
        caught["caught" if reds == len(s.test) else "missed"] += 1
    print("embedded" if embed else "verbatim", dict(caught))

# %% [markdown]
# The misses are the sites that never check the message body. An attacker can
# drop their prose altogether, and field lines alone do not identify the site.

# %%
print([s.label for s in sites if s.body_unchecked])

# %% [markdown]
# Logging in on the genuine origin stays quiet.

# %%
red = sum(store.check(m, s.origin).red is not None for s in sites for m in s.test)
print("red alerts on own origin:", red)
