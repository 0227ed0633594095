// Test doubles: an in-memory fetch that serves canned JSON per route and
// records every request it sees.

export interface RecordedCall {
  method: string;
  url: string;
  body: string | null;
}

export interface Route {
  method: string;
  path: string | RegExp;
  status?: number;
  reply: unknown | ((call: RecordedCall) => unknown);
}

export interface FakeFetch {
  fetchFn: (input: string, init?: RequestInit) => Promise<Response>;
  calls: RecordedCall[];
}

export function makeFetch(routes: Route[]): FakeFetch {
  const calls: RecordedCall[] = [];
  const fetchFn = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? init.body : null;
    const call: RecordedCall = { method, url: input, body };
    calls.push(call);
    for (const route of routes) {
      const matches =
        route.method === method &&
        (typeof route.path === "string"
          ? input === route.path
          : route.path.test(input));
      if (matches) {
        const doc = typeof route.reply === "function" ? (route.reply as (c: RecordedCall) => unknown)(call) : route.reply;
        return jsonResponse(doc, route.status ?? 200);
      }
    }
    return jsonResponse({ code: "not_found", message: `no route for ${method} ${input}` }, 404);
  };
  return { fetchFn, calls };
}

export function jsonResponse(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function postsTo(calls: RecordedCall[], pathPart: string): RecordedCall[] {
  return calls.filter((c) => c.method === "POST" && c.url.includes(pathPart));
}
