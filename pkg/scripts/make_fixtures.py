#!/usr/bin/env python3
"""Regenerate the pinned fixtures under data/.

Everything is derived from one seeded RNG, so reruns are byte-identical.
Outputs:
    data/stix/attack_snapshot.json   pinned ATT&CK-style bundle (188 parents)
    data/stix/capec_snapshot.json    CAPEC-style bundle referenced from it
    data/registry.json               registry built from the snapshot
    data/dataset_1000.csv            1,000-sample labeled corpus (all classes)
    data/tram_1482.json              TRAM-style export: 1,482 records, 80 classes
    data/docs/*.json                 six ground-truth documents
    data/reports/fin6_intrusion_report.txt  plain-text report fixture
"""
from __future__ import annotations

import json
import sys
import uuid
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from attack_mapper import corpus, stix_ingest  # noqa: E402

SEED = 20240607
DATA = ROOT / "data"

TACTICS = (
    "reconnaissance",
    "resource-development",
    "initial-access",
    "execution",
    "persistence",
    "privilege-escalation",
    "defense-evasion",
    "credential-access",
    "discovery",
    "lateral-movement",
    "collection",
    "command-and-control",
    "exfiltration",
    "impact",
)

# Well-known techniques with their actual tactic memberships; the rest of
# the 188-class space is padded with synthetic entries.
REAL_TECHNIQUES = [
    ("T1003", "OS Credential Dumping", ("credential-access",)),
    ("T1005", "Data from Local System", ("collection",)),
    ("T1007", "System Service Discovery", ("discovery",)),
    ("T1010", "Application Window Discovery", ("discovery",)),
    ("T1012", "Query Registry", ("discovery",)),
    ("T1016", "System Network Configuration Discovery", ("discovery",)),
    ("T1018", "Remote System Discovery", ("discovery",)),
    ("T1020", "Automated Exfiltration", ("exfiltration",)),
    ("T1021", "Remote Services", ("lateral-movement",)),
    ("T1027", "Obfuscated Files or Information", ("defense-evasion",)),
    ("T1033", "System Owner/User Discovery", ("discovery",)),
    ("T1036", "Masquerading", ("defense-evasion",)),
    ("T1037", "Boot or Logon Initialization Scripts", ("persistence", "privilege-escalation")),
    ("T1040", "Network Sniffing", ("credential-access", "discovery")),
    ("T1041", "Exfiltration Over C2 Channel", ("exfiltration",)),
    ("T1046", "Network Service Discovery", ("discovery",)),
    ("T1047", "Windows Management Instrumentation", ("execution",)),
    ("T1048", "Exfiltration Over Alternative Protocol", ("exfiltration",)),
    ("T1049", "System Network Connections Discovery", ("discovery",)),
    ("T1053", "Scheduled Task/Job", ("execution", "persistence", "privilege-escalation")),
    ("T1055", "Process Injection", ("defense-evasion", "privilege-escalation")),
    ("T1056", "Input Capture", ("collection", "credential-access")),
    ("T1057", "Process Discovery", ("discovery",)),
    ("T1059", "Command and Scripting Interpreter", ("execution",)),
    ("T1068", "Exploitation for Privilege Escalation", ("privilege-escalation",)),
    ("T1070", "Indicator Removal", ("defense-evasion",)),
    ("T1071", "Application Layer Protocol", ("command-and-control",)),
    ("T1074", "Data Staged", ("collection",)),
    ("T1078", "Valid Accounts", ("defense-evasion", "persistence", "privilege-escalation", "initial-access")),
    ("T1082", "System Information Discovery", ("discovery",)),
    ("T1083", "File and Directory Discovery", ("discovery",)),
    ("T1087", "Account Discovery", ("discovery",)),
    ("T1090", "Proxy", ("command-and-control",)),
    ("T1095", "Non-Application Layer Protocol", ("command-and-control",)),
    ("T1098", "Account Manipulation", ("persistence", "privilege-escalation")),
    ("T1102", "Web Service", ("command-and-control",)),
    ("T1105", "Ingress Tool Transfer", ("command-and-control",)),
    ("T1110", "Brute Force", ("credential-access",)),
    ("T1112", "Modify Registry", ("defense-evasion",)),
    ("T1113", "Screen Capture", ("collection",)),
    ("T1119", "Automated Collection", ("collection",)),
    ("T1133", "External Remote Services", ("persistence", "initial-access")),
    ("T1134", "Access Token Manipulation", ("defense-evasion", "privilege-escalation")),
    ("T1140", "Deobfuscate/Decode Files or Information", ("defense-evasion",)),
    ("T1190", "Exploit Public-Facing Application", ("initial-access",)),
    ("T1204", "User Execution", ("execution",)),
    ("T1210", "Exploitation of Remote Services", ("lateral-movement",)),
    ("T1218", "System Binary Proxy Execution", ("defense-evasion",)),
    ("T1486", "Data Encrypted for Impact", ("impact",)),
    ("T1490", "Inhibit System Recovery", ("impact",)),
    ("T1518", "Software Discovery", ("discovery",)),
    ("T1538", "Cloud Service Dashboard", ("discovery",)),
    ("T1543", "Create or Modify System Process", ("persistence", "privilege-escalation")),
    ("T1546", "Event Triggered Execution", ("persistence", "privilege-escalation")),
    ("T1547", "Boot or Logon Autostart Execution", ("persistence", "privilege-escalation")),
    ("T1548", "Abuse Elevation Control Mechanism", ("privilege-escalation", "defense-evasion")),
    ("T1552", "Unsecured Credentials", ("credential-access",)),
    ("T1555", "Credentials from Password Stores", ("credential-access",)),
    ("T1557", "Adversary-in-the-Middle", ("credential-access", "collection")),
    ("T1560", "Archive Collected Data", ("collection",)),
    ("T1562", "Impair Defenses", ("defense-evasion",)),
    ("T1566", "Phishing", ("initial-access",)),
    ("T1569", "System Services", ("execution",)),
    ("T1570", "Lateral Tool Transfer", ("lateral-movement",)),
    ("T1573", "Encrypted Channel", ("command-and-control",)),
]

SUBTECHNIQUES = [
    ("T1003.003", "NTDS"),
    ("T1021.001", "Remote Desktop Protocol"),
    ("T1027.002", "Software Packing"),
    ("T1036.005", "Match Legitimate Name or Location"),
    ("T1048.002", "Exfiltration Over Asymmetric Encrypted Non-C2 Protocol"),
    ("T1055.001", "Dynamic-link Library Injection"),
    ("T1059.001", "PowerShell"),
    ("T1059.003", "Windows Command Shell"),
    ("T1070.004", "File Deletion"),
    ("T1078.002", "Domain Accounts"),
    ("T1098.002", "Additional Email Delegate Permissions"),
    ("T1102.002", "Bidirectional Communication"),
    ("T1110.003", "Password Spraying"),
    ("T1134.001", "Token Impersonation and Theft"),
    ("T1543.003", "Windows Service"),
    ("T1546.008", "Accessibility Features"),
    ("T1547.014", "Active Setup"),
    ("T1548.002", "Bypass User Account Control"),
    ("T1552.001", "Credentials In Files"),
    ("T1560.001", "Archive via Utility"),
    ("T1562.001", "Disable or Modify Tools"),
    ("T1566.001", "Spearphishing Attachment"),
    ("T1569.002", "Service Execution"),
    ("T1573.002", "Asymmetric Cryptography"),
]

SYNTH_NAME_A = (
    "Container", "Pipeline", "Firmware", "Hypervisor", "Broker", "Kernel",
    "Driver", "Template", "Snapshot", "Replica", "Manifest", "Scheduler",
    "Enclave", "Quota", "Mailbox", "Filter", "Policy", "Cache",
)
SYNTH_NAME_B = (
    "Seeding", "Hijacking", "Tampering", "Poisoning", "Abuse", "Spoofing",
    "Flooding", "Cloaking", "Drift", "Rebinding", "Smuggling", "Splicing",
    "Shadowing", "Grafting", "Recycling", "Laundering",
)

ACTORS = (
    "FIN6", "FIN7", "APT29", "APT41", "MenuPass", "WizardSpider",
    "Gamaredon Group", "Lazarus Group", "Turla", "OilRig", "Sandworm",
    "MuddyWater",
)
MALWARE = (
    "Hydraq", "PoisonIvy", "XCSSET", "BADNEWS", "Hildegard", "Kobalos",
    "TEARDROP", "SharpStage", "Emotet", "TrickBot", "Ryuk", "QakBot",
    "PlugX", "Grately", "Vermilion",
)
TOOLS = ("Mimikatz", "Cobalt Strike", "PsExec", "AdFind", "Rclone")

SIG_ADJ = (
    "encoded", "staged", "beaconing", "persistent", "obfuscated", "tunneled",
    "spoofed", "forged", "hollowed", "injected", "scheduled", "elevated",
    "dumped", "archived", "harvested", "rogue", "covert", "signed",
    "unsigned", "hooked", "chained", "embedded", "mirrored", "cloned",
    "throttled", "encrypted", "compressed", "fragmented", "randomized",
    "masked", "pivoted", "relayed", "redirected", "cached", "replayed",
    "escalated", "disabled", "tampered", "renamed", "packed", "wrapped",
    "minified", "padded", "rotated", "seeded", "burst",
)
SIG_NOUN = (
    "loader", "implant", "beacon", "payload", "dropper", "stager",
    "shellcode", "keylogger", "webshell", "rootkit", "backdoor", "listener",
    "harvester", "scraper", "sniffer", "tunneler", "injector", "launcher",
    "spooler", "manifest", "artifact", "snapshot", "mutex", "container",
    "bootloader", "credential", "wordlist", "certificate", "token", "cookie",
    "handle", "socket", "channel", "gateway", "relay", "subnet", "endpoint",
    "workstation", "controller", "repository", "bucket", "share", "archive",
    "database", "directory", "inventory", "telemetry", "heartbeat",
    "watchdog", "daemon", "module", "ledger", "vault", "planner", "probe",
    "courier", "binder", "warden",
)

VERBS = (
    "deploys", "stages", "harvests", "enumerates", "executes", "installs",
    "decodes", "injects", "relays", "captures", "archives", "spawns",
    "rotates", "mirrors", "schedules", "tunnels",
)

FILLER_SENTENCES = (
    "The campaign primarily targeted organizations in the {sector} sector.",
    "Incident responders recovered forensic evidence from {n} affected hosts.",
    "Victims were notified in accordance with regional disclosure requirements.",
    "The report appendix lists indicators of compromise observed during the engagement.",
    "Timeline reconstruction was complicated by sparse logging on legacy equipment.",
    "The intrusion lasted approximately {n} days before containment.",
    "Security teams coordinated with national authorities throughout the investigation.",
    "Patch levels varied significantly across the affected environment.",
    "The group is assessed to be financially motivated based on victimology.",
    "A follow-up assessment validated the effectiveness of the remediation plan.",
    "Affected business units resumed normal operations within two weeks.",
    "Analysts continue to monitor related infrastructure for renewed activity.",
    "Executive leadership received daily briefings during the response effort.",
    "The investigation drew on packet captures retained by the network team.",
    "No evidence of data destruction was identified during recovery.",
    "Insurance assessors reviewed the financial impact of the outage.",
)
SECTORS = ("retail", "healthcare", "hospitality", "finance", "manufacturing", "energy")


def tid_uuid(kind: str, key: str) -> str:
    return f"{kind}--{uuid.uuid5(uuid.NAMESPACE_URL, 'attack-mapper:' + key)}"


def build_technique_table():
    """188 parents: the curated real ones plus deterministic synthetics."""
    table = list(REAL_TECHNIQUES)
    i = 0
    a = b = 0
    while len(table) < 188:
        tid = f"T19{i:02d}" if i < 100 else f"T18{i - 100:02d}"
        name = f"{SYNTH_NAME_A[a % len(SYNTH_NAME_A)]} {SYNTH_NAME_B[b % len(SYNTH_NAME_B)]}"
        tactics = (TACTICS[(i * 5) % len(TACTICS)],)
        if i % 4 == 1:
            tactics = tactics + (TACTICS[(i * 5 + 7) % len(TACTICS)],)
        table.append((tid, name, tactics))
        i += 1
        a += 1
        if a % len(SYNTH_NAME_A) == 0:
            b += 1
        b += 1
    return table


def assign_signatures(rng, technique_ids):
    """Unique adj+noun phrases per technique: the learnable class signal."""
    combos = [(a, n) for a in SIG_ADJ for n in SIG_NOUN]
    order = rng.permutation(len(combos))
    sigs = {}
    pos = 0
    for tid in technique_ids:
        sigs[tid] = [f"{combos[order[pos + j]][0]} {combos[order[pos + j]][1]}" for j in range(4)]
        pos += 4
    return sigs


def pick(rng, pool):
    return str(pool[int(rng.integers(0, len(pool)))])


def technique_sentence(rng, name: str, sigs: list[str]) -> str:
    """One pertinent sentence carrying this technique's signature terms."""
    sig = pick(rng, sigs)
    style = int(rng.integers(0, 6))
    actor = pick(rng, ACTORS + MALWARE)
    verb = pick(rng, VERBS)
    tool = pick(rng, TOOLS)
    if style == 0:
        return f"{actor} {verb} a {sig} to advance the operation."
    if style == 1:
        return f"The {sig} observed here is characteristic of {name.lower()} activity."
    if style == 2:
        return f"{actor} used {tool} alongside a {sig} during this phase."
    if style == 3:
        sig2 = pick(rng, sigs)
        return f"Operators combined the {sig} with a {sig2} to stay resident."
    if style == 4:
        return f"Telemetry shows the {sig} touching multiple hosts in sequence."
    return f"A {sig} was recovered from disk and linked to {name.lower()}."


def ap_description(rng, name: str, sigs: list[str]) -> str:
    s0, s1, s2, s3 = sigs
    first = f"Adversaries may rely on a {s0} to perform {name.lower()}."
    second = f"This behavior commonly involves a {s1} or a {s2} staged on the target."
    third = f"Defenders can watch for a {s3} appearing outside baseline activity."
    return " ".join([first, second, third])


def rel_description(rng, source_name: str, tech_name: str, sigs: list[str]) -> str:
    n_sentences = int(rng.integers(1, 4))
    out = [technique_sentence(rng, tech_name, sigs) for _ in range(n_sentences)]
    if rng.random() < 0.5:
        out[0] = f"{source_name} {pick(rng, VERBS)} a {pick(rng, sigs)} on compromised endpoints."
    return " ".join(out)


def filler_sentence(rng) -> str:
    template = pick(rng, FILLER_SENTENCES)
    return template.format(sector=pick(rng, SECTORS), n=int(rng.integers(3, 90)))


def build_attack_bundle(rng, table, sigs):
    objects = []
    # source objects: intrusion sets, malware, tools
    source_ids = {}
    for name in ACTORS:
        oid = tid_uuid("intrusion-set", name)
        source_ids[name] = oid
        objects.append(
            {
                "type": "intrusion-set",
                "id": oid,
                "name": name,
                "description": f"{name} is a tracked threat group.",
            }
        )
    for name in MALWARE:
        oid = tid_uuid("malware", name)
        source_ids[name] = oid
        objects.append(
            {"type": "malware", "id": oid, "name": name, "is_family": True}
        )
    for name in TOOLS:
        oid = tid_uuid("tool", name)
        source_ids[name] = oid
        objects.append({"type": "tool", "id": oid, "name": name})

    capec_assignment = {}
    ap_ids = {}
    sub_parent_name = {}
    for idx, (tid, name, tactics) in enumerate(table):
        oid = tid_uuid("attack-pattern", tid)
        ap_ids[tid] = oid
        ext = [
            {
                "source_name": "mitre-attack",
                "external_id": tid,
                "url": f"https://attack.mitre.org/techniques/{tid}",
            }
        ]
        if idx % 6 == 0:
            capec_id = f"CAPEC-{100 + idx}"
            ext.append({"source_name": "capec", "external_id": capec_id})
            capec_assignment[tid] = capec_id
        objects.append(
            {
                "type": "attack-pattern",
                "id": oid,
                "name": name,
                "description": ap_description(rng, name, sigs[tid]),
                "kill_chain_phases": [
                    {"kill_chain_name": "mitre-attack", "phase_name": t}
                    for t in tactics
                ],
                "external_references": ext,
            }
        )
    # one CAPEC id referenced by two techniques
    capec_assignment["T1110"] = capec_assignment.get("T1003", "CAPEC-100")
    for sub_id, sub_name in SUBTECHNIQUES:
        parent = sub_id.split(".")[0]
        sub_parent_name[sub_id] = sub_name
        oid = tid_uuid("attack-pattern", sub_id)
        ap_ids[sub_id] = oid
        parent_tactics = next(t for t, _, _ in ((r[0], r[1], r[2]) for r in table) if t == parent)
        tactics = dict((t[0], t[2]) for t in table)[parent]
        objects.append(
            {
                "type": "attack-pattern",
                "id": oid,
                "name": sub_name,
                "description": ap_description(rng, sub_name, sigs[parent]),
                "kill_chain_phases": [
                    {"kill_chain_name": "mitre-attack", "phase_name": t}
                    for t in tactics
                ],
                "external_references": [
                    {
                        "source_name": "mitre-attack",
                        "external_id": sub_id,
                        "url": f"https://attack.mitre.org/techniques/{sub_id.replace('.', '/')}",
                    }
                ],
                "x_mitre_is_subtechnique": True,
            }
        )
    # filtered-out objects: revoked, deprecated, missing external id
    objects.append(
        {
            "type": "attack-pattern",
            "id": tid_uuid("attack-pattern", "revoked-1"),
            "name": "Graphical User Interface",
            "description": "Legacy entry retained for compatibility.",
            "external_references": [
                {"source_name": "mitre-attack", "external_id": "T1061"}
            ],
            "revoked": True,
        }
    )
    objects.append(
        {
            "type": "attack-pattern",
            "id": tid_uuid("attack-pattern", "deprecated-1"),
            "name": "Hypervisor",
            "description": "Deprecated entry.",
            "external_references": [
                {"source_name": "mitre-attack", "external_id": "T1062"}
            ],
            "x_mitre_deprecated": True,
        }
    )
    objects.append(
        {
            "type": "attack-pattern",
            "id": tid_uuid("attack-pattern", "no-ext-id"),
            "name": "Unlabeled Pattern",
            "description": "Entry without a technique id reference.",
        }
    )

    # relationships: Zipf-ish description volume, heaviest first in table order
    parent_ids = [t[0] for t in table]
    weights = np.array([1.0 / (1.0 + 0.11 * r) for r in range(len(parent_ids))])
    rel_counts = np.maximum(1, np.round(weights * 7.2)).astype(int)
    rng.shuffle(rel_counts)  # decouple volume from id order
    # make the curated heavy hitters heavy for realism
    boost = {"T1059": 22, "T1003": 14, "T1566": 12, "T1547": 10, "T1562": 10, "T1105": 9}
    all_sources = list(ACTORS + MALWARE + TOOLS)
    rel_objects = []
    for i, tid in enumerate(parent_ids):
        n_rel = int(boost.get(tid, rel_counts[i]))
        name = dict((t[0], t[1]) for t in table)[tid]
        targets = [tid]
        for sub_id, _ in SUBTECHNIQUES:
            if sub_id.startswith(tid + "."):
                targets.append(sub_id)
        for j in range(n_rel):
            source = pick(rng, all_sources)
            target = targets[int(rng.integers(0, len(targets)))]
            target_name = sub_parent_name.get(target, name)
            rel_objects.append(
                {
                    "type": "relationship",
                    "id": tid_uuid("relationship", f"{tid}-{j}"),
                    "relationship_type": "uses",
                    "source_ref": source_ids[source],
                    "target_ref": ap_ids[target],
                    "description": rel_description(rng, source, target_name, sigs[tid]),
                }
            )
    # degenerate relationships exercising the skip paths
    rel_objects.append(
        {
            "type": "relationship",
            "id": tid_uuid("relationship", "no-description"),
            "relationship_type": "uses",
            "source_ref": source_ids["FIN6"],
            "target_ref": ap_ids["T1059"],
        }
    )
    rel_objects.append(
        {
            "type": "relationship",
            "id": tid_uuid("relationship", "to-revoked"),
            "relationship_type": "uses",
            "source_ref": source_ids["FIN6"],
            "target_ref": tid_uuid("attack-pattern", "revoked-1"),
            "description": "FIN6 interacted with a legacy desktop session broker.",
        }
    )
    rel_objects.append(
        {
            "type": "relationship",
            "id": tid_uuid("relationship", "non-ap-target"),
            "relationship_type": "uses",
            "source_ref": source_ids["FIN6"],
            "target_ref": source_ids["Mimikatz"],
            "description": "FIN6 operates this tool during intrusions.",
        }
    )
    objects.extend(rel_objects)
    bundle = {
        "type": "bundle",
        "id": tid_uuid("bundle", "attack-snapshot"),
        "spec_version": "2.1",
        "objects": objects,
    }
    return bundle, capec_assignment


def build_capec_bundle(rng, table, sigs, capec_assignment):
    objects = []
    skip = {"CAPEC-148"}  # left dangling on purpose
    seen = set()
    for tid, capec_id in sorted(capec_assignment.items()):
        if capec_id in seen or capec_id in skip:
            continue
        seen.add(capec_id)
        name = dict((t[0], t[1]) for t in table).get(tid, tid)
        text = (
            f"An attacker abuses a {pick(rng, sigs[tid])} to reproduce "
            f"{name.lower()} against exposed software. "
            f"The pattern also covers a {pick(rng, sigs[tid])} variant."
        )
        objects.append(
            {
                "type": "attack-pattern",
                "id": tid_uuid("attack-pattern", capec_id),
                "name": f"Pattern {capec_id}",
                "description": text,
                "external_references": [
                    {"source_name": "capec", "external_id": capec_id}
                ],
            }
        )
    return {
        "type": "bundle",
        "id": tid_uuid("bundle", "capec-snapshot"),
        "spec_version": "2.1",
        "objects": objects,
    }


def downsample_to(corpus_obj, registry, target_total: int):
    """Proportional per-class downsample, min 2 per class, exact total."""
    counts = corpus_obj.stats["class_counts"]
    ids = sorted(counts)
    total = sum(counts.values())
    target = {tid: max(2, int(np.floor(target_total * counts[tid] / total))) for tid in ids}
    target = {tid: min(target[tid], counts[tid]) for tid in ids}
    diff = target_total - sum(target.values())
    ranked = sorted(ids, key=lambda t: -counts[t])
    k = 0
    while diff != 0:
        tid = ranked[k % len(ranked)]
        if diff > 0 and target[tid] < counts[tid]:
            target[tid] += 1
            diff -= 1
        elif diff < 0 and target[tid] > 2:
            target[tid] -= 1
            diff += 1
        k += 1
    kept = []
    used = {tid: 0 for tid in ids}
    for sample in corpus_obj.samples:
        if used[sample.technique_id] < target[sample.technique_id]:
            kept.append(sample)
            used[sample.technique_id] += 1
    return corpus.LabeledCorpus(samples=tuple(kept), registry=registry)


def build_tram_fixture(rng, registry, sigs, n_records=1482, n_classes=80):
    names = {t.id: t.name for t in registry.techniques}
    ids = list(registry.ids)
    picked = [ids[int(i)] for i in rng.choice(len(ids), size=n_classes, replace=False)]
    weights = np.array([1.0 / (1 + r) for r in range(n_classes)])
    alloc = np.maximum(2, np.floor(weights / weights.sum() * n_records)).astype(int)
    while alloc.sum() > n_records:
        alloc[int(np.argmax(alloc))] -= 1
    while alloc.sum() < n_records:
        alloc[int(np.argmin(alloc))] += 1
    records = []
    for tid, n in zip(picked, alloc):
        for _ in range(int(n)):
            records.append(
                {
                    "text": technique_sentence(rng, names[tid], sigs[tid]),
                    "technique_id": tid,
                    "technique_name": names[tid],
                }
            )
    order = rng.permutation(len(records))
    return [records[int(i)] for i in order]


DOC_SPECS = [
    ("fin6-fireeye", "Dissecting a FIN6 Payment Card Operation", 17, 81),
    ("fin6-mandiant", "Intercepting a FIN6 Intrusion: Access to Ransomware", 50, 101),
    ("menupass-symantec", "MenuPass: Espionage Against Managed Service Providers", 32, 73),
    ("menupass-doj", "MenuPass: Indictment-Derived Activity Summary", 23, 46),
    ("wizardspider-cisa", "WizardSpider Ransomware Activity Targeting Healthcare", 99, 275),
    ("wizardspider-dfir", "WizardSpider: A Ryuk Intrusion Timeline", 72, 76),
]


def build_documents(rng, registry, sigs):
    names = {t.id: t.name for t in registry.techniques}
    ids = list(registry.ids)
    sub_ids = sorted(registry.subtech_parent)
    docs = []
    for doc_id, title, n_tech, n_sent in DOC_SPECS:
        chosen = sorted(
            ids[int(i)] for i in rng.choice(len(ids), size=n_tech, replace=False)
        )
        pertinent = []
        for tid in chosen:
            pertinent.append(technique_sentence(rng, names[tid], sigs[tid]))
        extra = max(0, min(n_sent - len(chosen) - max(4, n_sent // 4), n_sent - len(chosen)))
        for _ in range(extra):
            tid = chosen[int(rng.integers(0, len(chosen)))]
            pertinent.append(technique_sentence(rng, names[tid], sigs[tid]))
        n_filler = n_sent - len(pertinent)
        sentences = pertinent + [filler_sentence(rng) for _ in range(n_filler)]
        order = rng.permutation(len(sentences))
        sentences = [sentences[int(i)] for i in order]
        assert len(sentences) == n_sent
        # list a few ground-truth entries at sub-technique granularity
        listed = list(chosen)
        for i, tid in enumerate(listed):
            if i % 9 == 3:
                subs = [s for s in sub_ids if s.startswith(tid + ".")]
                if subs:
                    listed[i] = subs[0]
        docs.append(
            {
                "doc_id": doc_id,
                "title": title,
                "source_url": f"https://example.org/reports/{doc_id}",
                "sentences": sentences,
                "techniques": sorted(listed),
            }
        )
    return docs


def main() -> int:
    rng = np.random.default_rng(SEED)
    table = build_technique_table()
    assert len(table) == 188, len(table)
    sigs = assign_signatures(rng, [t[0] for t in table])

    (DATA / "stix").mkdir(parents=True, exist_ok=True)
    (DATA / "docs").mkdir(parents=True, exist_ok=True)
    (DATA / "reports").mkdir(parents=True, exist_ok=True)

    attack_bundle, capec_assignment = build_attack_bundle(rng, table, sigs)
    capec_bundle = build_capec_bundle(rng, table, sigs, capec_assignment)
    attack_path = DATA / "stix" / "attack_snapshot.json"
    capec_path = DATA / "stix" / "capec_snapshot.json"
    attack_path.write_text(json.dumps(attack_bundle, indent=1, sort_keys=True) + "\n")
    capec_path.write_text(json.dumps(capec_bundle, indent=1, sort_keys=True) + "\n")

    bundle = stix_ingest.parse_bundle(attack_path.read_bytes())
    registry = stix_ingest.build_registry(bundle)
    assert len(registry) == 188, len(registry)
    report = stix_ingest.IngestReport()
    samples = stix_ingest.extract_samples(bundle, registry, report)
    samples = stix_ingest.enrich_with_capec(
        samples, stix_ingest.parse_bundle(capec_path.read_bytes()), registry, report
    )
    stix_ingest.save_registry(registry, DATA / "registry.json")

    built = corpus.build_dataset(samples, registry)
    assert built.stats["n_classes_present"] == 188
    print(f"full synthetic corpus: {len(built)} sentences")
    small = downsample_to(built, registry, 1000)
    assert len(small) == 1000 and small.stats["n_classes_present"] == 188
    corpus.export_csv(small, DATA / "dataset_1000.csv")

    tram = build_tram_fixture(rng, registry, sigs)
    assert len(tram) == 1482
    assert len({r["technique_id"] for r in tram}) == 80
    (DATA / "tram_1482.json").write_text(json.dumps(tram, indent=0) + "\n")

    docs = build_documents(rng, registry, sigs)
    for doc in docs:
        (DATA / "docs" / f"{doc['doc_id']}.json").write_text(
            json.dumps(doc, indent=1) + "\n"
        )
    fin6 = next(d for d in docs if d["doc_id"] == "fin6-fireeye")
    joined = " ".join(fin6["sentences"])
    resplit = corpus.split_sentences(joined)
    assert resplit == fin6["sentences"], (
        f"report fixture does not re-split cleanly: {len(resplit)} vs "
        f"{len(fin6['sentences'])}"
    )
    (DATA / "reports" / "fin6_intrusion_report.txt").write_text(joined + "\n")

    print("ingest counts:", dict(sorted(report.counts.items())))
    print("fixtures written to", DATA)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
