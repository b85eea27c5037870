import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AgreementController, AnnotateController, TriageController } from "../src/controllers.js";
import { formatKappa } from "../src/format.js";
import { FakeService, makeAd, makeFlag } from "./fake_service.js";

function seeded(n = 10): { service: FakeService; api: ApiClient } {
  const service = new FakeService();
  const ads = Array.from({ length: n }, (_, i) => makeAd(`ad${i}`, `texto do anúncio ${i}`));
  const flags = Array.from({ length: n }, (_, i) => makeFlag(`ad${i}`, 0.99 - i * 0.01));
  service.seed(ads, flags);
  return { service, api: new ApiClient("http://fake", service.fetch) };
}

describe("TriageController", () => {
  it("loads the unreviewed queue sorted by descending score", async () => {
    const { api } = seeded(5);
    const triage = new TriageController(api, "rev-1");
    await triage.load();
    expect(triage.state.queue.map((i) => i.ad_id)).toEqual(["ad0", "ad1", "ad2", "ad3", "ad4"]);
    expect(triage.current()!.text).toBe("texto do anúncio 0");
  });

  it("ten keyboard verdicts produce exactly ten journaled events matching the clicks", async () => {
    const { service, api } = seeded(10);
    const triage = new TriageController(api, "rev-1");
    await triage.load();

    const clicks = ["1", "1", "2", "3", "1", "2", "1", "1", "3", "2"] as const;
    const expected = {
      "1": "political",
      "2": "non_political",
      "3": "unsure",
    } as const;
    const expectedOrder = triage.state.queue.map((i) => i.ad_id);

    for (const key of clicks) {
      await triage.handleKey(key);
    }

    expect(service.verdictEvents.length).toBe(10);
    expect(service.verdictEvents.map((e) => e.verdict)).toEqual(clicks.map((c) => expected[c]));
    expect(service.verdictEvents.map((e) => e.ad_id)).toEqual(expectedOrder);
    expect(service.verdictEvents.every((e) => e.reviewer === "rev-1")).toBe(true);
    expect(triage.state.queue).toEqual([]);
    expect(triage.state.tallies).toEqual({ confirmed: 5, rejected: 3, unsure: 2 });
  });

  it("GET /flags reflects a posted verdict", async () => {
    const { service, api } = seeded(3);
    const triage = new TriageController(api, "rev-1");
    await triage.load();
    await triage.setVerdict("non_political");
    const rejected = await api.getFlags("non_political");
    expect(rejected.map((f) => f.ad_id)).toEqual(["ad0"]);
    expect(service.flags.get("ad0")!.verdict).toBe("non_political");
  });

  it("rolls back and shows an error when the write fails", async () => {
    const { service, api } = seeded(3);
    const triage = new TriageController(api, "rev-1");
    await triage.load();
    service.failWrites = true;
    const ok = await triage.setVerdict("political");
    expect(ok).toBe(false);
    expect(triage.state.queue.length).toBe(3);
    expect(triage.state.queue[0].ad_id).toBe("ad0");
    expect(triage.state.tallies.confirmed).toBe(0);
    expect(triage.state.error).toMatch(/write failed/);
  });

  it("verdict retries send identical requests (idempotent on the wire)", async () => {
    const { service, api } = seeded(2);
    const triage = new TriageController(api, "rev-1");
    await triage.load();
    service.failWrites = true;
    await triage.setVerdict("political");
    service.failWrites = false;
    await triage.setVerdict("political");
    const posts = service.requests.filter((r) => r.method === "POST");
    expect(posts.length).toBe(2);
    expect(posts[0].path).toBe(posts[1].path);
    expect(posts[0].body).toEqual(posts[1].body);
    expect(service.flags.get("ad0")!.verdict).toBe("political");
  });

  it("navigation keys move the cursor without posting", async () => {
    const { service, api } = seeded(3);
    const triage = new TriageController(api, "rev-1");
    await triage.load();
    await triage.handleKey("j");
    expect(triage.current()!.ad_id).toBe("ad1");
    await triage.handleKey("k");
    expect(triage.current()!.ad_id).toBe("ad0");
    expect(service.verdictEvents.length).toBe(0);
  });
});

describe("AnnotateController", () => {
  it("queues only ads this annotator has not labeled", async () => {
    const { service, api } = seeded(4);
    service.labels.set("ad1|ana", { ad_id: "ad1", annotator: "ana", label: "political", at: "t" });
    const annotate = new AnnotateController(api, "ana");
    await annotate.load();
    expect(annotate.state.queue.map((a) => a.id)).toEqual(["ad0", "ad2", "ad3"]);
  });

  it("the ad leaves the queue only after a successful label write", async () => {
    const { service, api } = seeded(2);
    const annotate = new AnnotateController(api, "ana");
    await annotate.load();

    service.failWrites = true;
    expect(await annotate.setLabel("political")).toBe(false);
    expect(annotate.state.queue.length).toBe(2);
    expect(annotate.state.error).toMatch(/label write failed/);

    service.failWrites = false;
    expect(await annotate.setLabel("political")).toBe(true);
    expect(annotate.state.queue.map((a) => a.id)).toEqual(["ad1"]);
    expect(service.labels.get("ad0|ana")!.label).toBe("political");
  });

  it("never requests scores (no anchoring)", async () => {
    const { service, api } = seeded(3);
    const annotate = new AnnotateController(api, "ana");
    await annotate.load();
    await annotate.handleKey("1");
    const paths = service.requests.map((r) => r.path);
    expect(paths.some((p) => p.startsWith("/score") || p.startsWith("/flags"))).toBe(false);
  });
});

describe("AgreementController", () => {
  it("renders the service fixture as 0.62 (Substantial)", async () => {
    const { api } = seeded(1);
    const agreement = new AgreementController(api);
    const view = await agreement.fetchPair("a", "b");
    expect(view.error).toBeNull();
    expect(formatKappa(view.report!.kappa, view.report!.landis_koch_band)).toBe("0.62 (Substantial)");
    expect(view.report!.agreement_pct).toBe(80.0);
  });

  it("keeps the error visible when the service is down", async () => {
    const api = new ApiClient("http://fake", async () => {
      throw new Error("connection refused");
    });
    const agreement = new AgreementController(api);
    const view = await agreement.fetchPair("a", "b");
    expect(view.report).toBeNull();
    expect(view.error).toMatch(/unreachable/);
  });
});
