import { ApiClient } from "./api";
import { Explorer } from "./app";
import { CanvasTarget } from "./renderer";
import type { NodeProfile, RecommendationPayload, SearchResult } from "./types";

const canvas = document.getElementById("map") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const searchBox = document.getElementById("search") as HTMLInputElement;
const searchResults = document.getElementById("search-results") as HTMLElement;
const highlightBox = document.getElementById("highlight") as HTMLInputElement;
const infoPanel = document.getElementById("info") as HTMLElement;
const noticeBar = document.getElementById("notice") as HTMLElement;

function resize(): void {
  canvas.width = window.innerWidth;
  canvas.height = window.innerHeight;
  explorer.camera.viewportWidth = canvas.width;
  explorer.camera.viewportHeight = canvas.height;
}

let rafScheduled = false;
function scheduleDraw(): void {
  if (rafScheduled) return;
  rafScheduled = true;
  requestAnimationFrame(() => {
    rafScheduled = false;
    explorer.render(target);
    renderPanels();
  });
}

const explorer = new Explorer(new ApiClient(""), window.innerWidth, window.innerHeight, scheduleDraw);
const target = new CanvasTarget(ctx);
window.addEventListener("resize", () => {
  resize();
  explorer.cameraMoved();
  scheduleDraw();
});
resize();

// initial view: whole map
explorer.camera.moveTo(0, 0, Math.min(canvas.width, canvas.height) / 2100);
void explorer.refreshViewport();

// --- pointer interaction ----------------------------------------------------

let dragging = false;
let lastX = 0;
let lastY = 0;
let movedSinceDown = 0;

canvas.addEventListener("mousedown", (e) => {
  dragging = true;
  movedSinceDown = 0;
  lastX = e.clientX;
  lastY = e.clientY;
});
window.addEventListener("mouseup", (e) => {
  if (dragging && movedSinceDown < 4) {
    explorer.clickAt(e.clientX, e.clientY);
  }
  dragging = false;
});
canvas.addEventListener("mousemove", (e) => {
  if (dragging) {
    explorer.pan(e.clientX - lastX, e.clientY - lastY);
    movedSinceDown += Math.abs(e.clientX - lastX) + Math.abs(e.clientY - lastY);
    lastX = e.clientX;
    lastY = e.clientY;
  } else {
    explorer.hover(e.clientX, e.clientY);
  }
});
canvas.addEventListener(
  "wheel",
  (e) => {
    e.preventDefault();
    explorer.zoomAt(e.clientX, e.clientY, Math.exp(-e.deltaY * 0.0015));
  },
  { passive: false },
);

// fly-to animation loop
let animStart: number | null = null;
function animate(now: number): void {
  if (animStart === null) animStart = now;
  const t = Math.min(1, (now - animStart) / 600);
  if (explorer.tickAnimation(t)) {
    requestAnimationFrame(animate);
  } else {
    animStart = null;
  }
}
const origFocus = explorer.focusNode.bind(explorer);
explorer.focusNode = async (id: string) => {
  await origFocus(id);
  animStart = null;
  requestAnimationFrame(animate);
};

// --- search boxes -------------------------------------------------------------

let searchTimer: ReturnType<typeof setTimeout> | null = null;
searchBox.addEventListener("input", () => {
  if (searchTimer) clearTimeout(searchTimer);
  searchTimer = setTimeout(async () => {
    const results = await explorer.search(searchBox.value);
    renderSearchResults(results);
  }, 150);
});

function renderSearchResults(results: SearchResult[]): void {
  searchResults.innerHTML = "";
  if (!results.length && searchBox.value.trim()) {
    searchResults.innerHTML = '<div class="empty">no matches</div>';
    return;
  }
  for (const r of results) {
    const item = document.createElement("button");
    item.className = "result";
    item.textContent = `${r.name} (${r.kind})`;
    item.addEventListener("click", () => {
      searchResults.innerHTML = "";
      searchBox.value = r.name;
      void explorer.focusNode(r.id);
    });
    searchResults.appendChild(item);
  }
}

highlightBox.addEventListener("change", () => {
  const q = highlightBox.value.trim();
  if (q) {
    void explorer.highlightCollaborators(q);
  } else {
    explorer.clearHighlight();
  }
});

// --- panels ---------------------------------------------------------------

function profileRows(p: NodeProfile): string {
  if (p.kind === "talent") {
    return `
      <dt>Institution</dt><dd>${escapeHtml(p.institution ?? "")}</dd>
      <dt>Publications</dt><dd>${p.publication_count ?? 0}</dd>
      <dt>Career start</dt><dd>${p.career_start_year ?? "unknown"}</dd>`;
  }
  return `<dt>Description</dt><dd>${escapeHtml(p.description ?? "")}</dd>`;
}

function recommendationList(recs: RecommendationPayload | null): string {
  if (!recs) return '<div class="empty">loading recommendations...</div>';
  if (!recs.entries.length) return '<div class="empty">no recommendations</div>';
  const label = recs.kind === "collaborator" ? "Recommended collaborators" : "Recommended users";
  const items = recs.entries
    .map(
      (e) => `
      <li>
        <button class="jump" data-id="${escapeHtml(e.target)}">${escapeHtml(e.name)}</button>
        <span class="score">${e.score.toFixed(3)}</span>
        <button class="why" data-id="${escapeHtml(e.target)}">Why Recommend?</button>
      </li>`,
    )
    .join("");
  return `<h3>${label}</h3><ol>${items}</ol>`;
}

function renderPanels(): void {
  noticeBar.textContent = explorer.notice ?? "";
  noticeBar.style.display = explorer.notice ? "block" : "none";
  const iw = explorer.infoWindow;
  if (!iw || explorer.selection.openPanel === "none") {
    infoPanel.style.display = "none";
    return;
  }
  infoPanel.style.display = "block";
  if (explorer.selection.openPanel === "justification") {
    const j = explorer.justification;
    infoPanel.innerHTML = `
      <button id="close-just">&larr; back</button>
      <h2>Why recommend?</h2>
      ${
        explorer.justificationPending
          ? '<div class="empty">asking the model...</div>'
          : `<p class="justification">${escapeHtml(j?.text ?? "")}</p>
             <div class="meta">${j ? escapeHtml(j.model) : ""} ${
               explorer.lastCacheState === "hit" ? "(cached)" : ""
             }</div>`
      }`;
    document.getElementById("close-just")?.addEventListener("click", () => explorer.closeJustification());
    return;
  }
  const p = iw.profile;
  infoPanel.innerHTML = `
    <button id="close-info">&times;</button>
    <h2>${escapeHtml(p.name)}</h2>
    <div class="kind">${p.kind}</div>
    <dl>${profileRows(p)}</dl>
    ${p.detail_url ? `<a href="${escapeHtml(p.detail_url)}" target="_blank" rel="noopener">Detail</a>` : ""}
    ${recommendationList(iw.recommendations)}`;
  document.getElementById("close-info")?.addEventListener("click", () => explorer.clearFocus());
  infoPanel.querySelectorAll("button.why").forEach((b) =>
    b.addEventListener("click", () => void explorer.whyRecommend((b as HTMLElement).dataset.id!)),
  );
  infoPanel.querySelectorAll("button.jump").forEach((b) =>
    b.addEventListener("click", () => void explorer.focusNode((b as HTMLElement).dataset.id!)),
  );
}

function escapeHtml(s: string): string {
  return s.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}
