/** Transient notifications; one region per app root. */

const REGION_CLASS = 'toast-region';

export function toastRegion(root: HTMLElement): HTMLElement {
  let region = root.querySelector<HTMLElement>(`.${REGION_CLASS}`);
  if (!region) {
    region = document.createElement('div');
    region.className = REGION_CLASS;
    region.setAttribute('role', 'status');
    region.setAttribute('aria-live', 'polite');
    root.appendChild(region);
  }
  return region;
}

export function showToast(
  root: HTMLElement,
  message: string,
  ttlMs = 4000,
): HTMLElement {
  const region = toastRegion(root);
  const toast = document.createElement('div');
  toast.className = 'toast';
  toast.textContent = message;
  region.appendChild(toast);
  setTimeout(() => toast.remove(), ttlMs);
  return toast;
}
