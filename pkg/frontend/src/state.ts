/** All selection/UI state flows through this object; rendering reads it and
 * nothing else besides the last viewport payload. */

export type PanelKind = "info" | "justification" | "none";

export class SelectionState {
  private focused: string | null = null;
  private highlight = new Set<string>();
  private panel: PanelKind = "none";
  private justificationTarget: string | null = null;

  get focusedNode(): string | null {
    return this.focused;
  }

  get openPanel(): PanelKind {
    return this.panel;
  }

  get highlightSet(): ReadonlySet<string> {
    return this.highlight;
  }

  get chosenTarget(): string | null {
    return this.justificationTarget;
  }

  focusNode(id: string): void {
    this.focused = id;
    this.panel = "info";
    this.justificationTarget = null;
  }

  clearFocus(): void {
    this.focused = null;
    this.panel = "none";
    this.justificationTarget = null;
  }

  /** Justification panel is only reachable with a focused node and a chosen
   * recommendation target. */
  openJustification(targetId: string): boolean {
    if (this.focused === null) return false;
    this.justificationTarget = targetId;
    this.panel = "justification";
    return true;
  }

  closeJustification(): void {
    if (this.panel === "justification") {
      this.panel = this.focused ? "info" : "none";
      this.justificationTarget = null;
    }
  }

  setHighlight(ids: Iterable<string>): void {
    this.highlight = new Set(ids);
  }

  clearHighlight(): void {
    this.highlight = new Set();
  }

  isHighlighted(id: string): boolean {
    return this.highlight.has(id);
  }
}
