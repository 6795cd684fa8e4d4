"""Scenario files and topology graph construction.

A scenario document describes one system: its devices, the vulnerabilities
sitting on them, the physical links, and the firewall rules its routers
enforce.  Loading a scenario populates a property graph with one node per
device and vulnerability, CONNECTS_TO edge pairs per link, and one Firewall
node per (source device, destination device) pair a rule expands to.

Graph attribute names follow the query conventions used elsewhere
(`accessibility`, `preConditions`, `srcPort`, ...); scenario file keys use
the snake_case names of the dataclasses below.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .graph import PropertyGraph

log = logging.getLogger(__name__)

KIND_END_DEVICE = "EndDevice"
KIND_ROUTER = "Router"
KIND_INTERNET = "Internet-host"

ALLOWS = "ALLOWS"
DENIES = "DENIES"

ANY = "Any"


class ScenarioError(Exception):
    """A scenario document failed validation or could not be applied."""


@dataclass
class DeviceSpec:
    name: str
    kind: str
    subnet: Optional[str] = None
    floor: Optional[str] = None
    accessibility: list = field(default_factory=list)
    privilege: Optional[str] = None


@dataclass
class VulnerabilitySpec:
    cve_id: str
    host: str
    pre_conditions: list
    post_conditions: list


@dataclass
class LinkSpec:
    a: str
    b: str
    via: str


@dataclass
class FirewallRuleSpec:
    rule_name: str
    router: str
    source: str
    destination: str
    src_port: str = "any"
    dst_port: str = "any"
    protocol: str = "TCP"
    action: str = ALLOWS


@dataclass
class ScenarioDoc:
    topology: str
    devices: list = field(default_factory=list)
    vulnerabilities: list = field(default_factory=list)
    links: list = field(default_factory=list)
    firewall_rules: list = field(default_factory=list)


def subnet_label(subnet: str) -> str:
    """Category label for a subnet attribute: "subnet 1" -> "Subnet1"."""
    return "".join(part.capitalize() for part in subnet.split())


def parse_scenario(text: str) -> ScenarioDoc:
    """Parse a YAML scenario document into a validated ScenarioDoc."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"not a valid scenario document: {exc}") from exc
    if not isinstance(raw, dict) or "topology" not in raw:
        raise ScenarioError("scenario document needs a top-level 'topology' key")
    doc = ScenarioDoc(topology=str(raw["topology"]))
    try:
        for entry in raw.get("devices") or []:
            doc.devices.append(DeviceSpec(**entry))
        for entry in raw.get("vulnerabilities") or []:
            doc.vulnerabilities.append(VulnerabilitySpec(**entry))
        for entry in raw.get("links") or []:
            doc.links.append(LinkSpec(**entry))
        for entry in raw.get("firewall_rules") or []:
            doc.firewall_rules.append(FirewallRuleSpec(**entry))
    except TypeError as exc:
        raise ScenarioError(f"unexpected scenario field: {exc}") from exc
    validate_scenario(doc)
    return doc


def load_scenario_file(path) -> ScenarioDoc:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_scenario(handle.read())


def _want_strings(values, where: str) -> None:
    if not all(isinstance(v, str) and v for v in values):
        raise ScenarioError(f"{where} entries must be non-empty strings")


def validate_scenario(doc: ScenarioDoc) -> None:
    names = set()
    for dev in doc.devices:
        if dev.name in names:
            raise ScenarioError(f"duplicate device name {dev.name!r}")
        names.add(dev.name)
        if dev.kind not in (KIND_END_DEVICE, KIND_ROUTER, KIND_INTERNET):
            raise ScenarioError(f"unknown device kind {dev.kind!r} on {dev.name!r}")
        if dev.privilege is not None and dev.kind == KIND_ROUTER:
            raise ScenarioError(f"privilege on router {dev.name!r}")
        _want_strings(dev.accessibility, f"accessibility of {dev.name!r}")
    routers = {d.name for d in doc.devices if d.kind == KIND_ROUTER}
    for vul in doc.vulnerabilities:
        if vul.host not in names:
            raise ScenarioError(f"vulnerability {vul.cve_id} references unknown host {vul.host!r}")
        if not vul.pre_conditions or not vul.post_conditions:
            raise ScenarioError(f"vulnerability {vul.cve_id} needs pre and post conditions")
        _want_strings(vul.pre_conditions, f"pre_conditions of {vul.cve_id}")
        _want_strings(vul.post_conditions, f"post_conditions of {vul.cve_id}")
    for link in doc.links:
        for end in (link.a, link.b):
            if end not in names:
                raise ScenarioError(f"link references unknown device {end!r}")
    for rule in doc.firewall_rules:
        if rule.router not in routers:
            raise ScenarioError(f"rule {rule.rule_name!r} references unknown router {rule.router!r}")
        if rule.action not in (ALLOWS, DENIES):
            raise ScenarioError(f"rule {rule.rule_name!r} has unknown action {rule.action!r}")


def _device_labels(doc_topology: str, dev: DeviceSpec) -> set:
    labels = {doc_topology}
    if dev.kind == KIND_ROUTER:
        labels.add("Router")
    else:
        labels.add("EndDevice")
        if dev.kind == KIND_INTERNET:
            labels.add("Internet")
    if dev.subnet:
        labels.add(subnet_label(dev.subnet))
    return labels


def load_scenario(doc: ScenarioDoc, g: PropertyGraph) -> str:
    """Materialise a scenario document into the graph; returns its topology label."""
    validate_scenario(doc)
    existing = {n.name for n in g.match_nodes({doc.topology})}
    ids = {}
    for dev in doc.devices:
        if dev.name in existing:
            raise ScenarioError(f"device {dev.name!r} already present in {doc.topology}")
        attrs = {"name": dev.name}
        if dev.subnet:
            attrs["subnet"] = dev.subnet
        if dev.floor:
            attrs["floor"] = dev.floor
        if dev.accessibility:
            attrs["accessibility"] = list(dev.accessibility)
        if dev.privilege:
            attrs["privilege"] = dev.privilege
        ids[dev.name] = g.create_node(_device_labels(doc.topology, dev), attrs)

    for vul in doc.vulnerabilities:
        vul_id = g.create_node(
            {doc.topology, "Vulnerability"},
            {
                "name": vul.cve_id,
                "preConditions": list(vul.pre_conditions),
                "postConditions": list(vul.post_conditions),
            },
        )
        g.merge_edge(ids[vul.host], vul_id, "HAS")

    for link in doc.links:
        g.merge_edge(ids[link.a], ids[link.b], "CONNECTS_TO", {"via": link.via})
        g.merge_edge(ids[link.b], ids[link.a], "CONNECTS_TO", {"via": link.via})

    expand_firewall_rules(doc.firewall_rules, g, doc.topology)
    return doc.topology


def _resolve_endpoint(g: PropertyGraph, topology: str, spec: str, source_side: bool) -> list:
    """Device nodes a rule endpoint stands for.

    "Any" in source position covers internet hosts plus every end device
    outside the rule's own topology; in destination position it covers the
    topology's own end devices.  Otherwise the endpoint is a device name or
    a subnet name (matched case-insensitively against subnet attributes).
    """
    if spec == ANY:
        if source_side:
            internet = g.match_nodes({"EndDevice", "Internet"})
            foreign = [
                n for n in g.match_nodes({"EndDevice"})
                if topology not in n.labels and "Internet" not in n.labels
            ]
            return internet + foreign
        return g.match_nodes({"EndDevice", topology})
    named = g.match_nodes({"EndDevice"}, {"name": spec})
    if named:
        return named
    wanted = spec.lower()
    return [
        n for n in g.match_nodes({"EndDevice", topology})
        if isinstance(n.attrs.get("subnet"), str) and n.attrs["subnet"].lower() == wanted
    ]


def expand_firewall_rules(rules: list, g: PropertyGraph, topology: str) -> int:
    """Create one Firewall node per (source, destination) device pair and
    attach it to the owning router with an ALLOWS or DENIES edge.

    Expansion happens against the devices present in the graph at call time;
    self-pairs are skipped.  Returns the number of rule nodes touched.
    """
    count = 0
    for rule in rules:
        router = g.find_node({"Router"}, {"name": rule.router})
        if router is None:
            raise ScenarioError(f"rule {rule.rule_name!r} references unknown router {rule.router!r}")
        sources = _resolve_endpoint(g, topology, rule.source, source_side=True)
        destinations = _resolve_endpoint(g, topology, rule.destination, source_side=False)
        expanded = 0
        for src in sources:
            for dst in destinations:
                if src.id == dst.id:
                    continue
                rule_node, _ = g.merge_node(
                    {topology, "Firewall"},
                    {
                        "name": rule.rule_name,
                        "source": src.name,
                        "destination": dst.name,
                        "srcPort": rule.src_port,
                        "dstPort": rule.dst_port,
                        "protocol": rule.protocol,
                    },
                )
                g.merge_edge(router.id, rule_node, rule.action)
                expanded += 1
        if expanded == 0:
            log.warning("firewall rule %s (%s -> %s) expanded to no device pair",
                        rule.rule_name, rule.source, rule.destination)
        count += expanded
    return count
