/** Browser adapter: materialize view nodes into DOM elements. */

import type { VNode } from "./view.js";

export function toElement(node: VNode): HTMLElement {
  const element = document.createElement(node.tag);
  for (const [name, value] of Object.entries(node.attrs)) {
    element.setAttribute(name, value);
  }
  for (const child of node.children) {
    if (typeof child === "string") {
      element.appendChild(document.createTextNode(child));
    } else {
      element.appendChild(toElement(child));
    }
  }
  return element;
}

export function replaceChildren(container: HTMLElement, node: VNode): void {
  container.replaceChildren(toElement(node));
}
