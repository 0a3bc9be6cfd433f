/**
 * String catalog. Spanish is the default locale; additional catalogs (e.g.
 * Mayan languages) register at runtime through registerCatalog without any
 * code changes — the extension point is the catalog map itself.
 */

export type CatalogKey =
  | "nav.upload"
  | "nav.studies"
  | "nav.feedback"
  | "nav.review"
  | "upload.title"
  | "upload.trajectory"
  | "upload.chooseFile"
  | "upload.start"
  | "upload.inProgress"
  | "upload.retry"
  | "upload.failed"
  | "upload.done"
  | "studies.title"
  | "studies.empty"
  | "studies.status.UPLOADED"
  | "studies.status.QUEUED"
  | "studies.status.PROCESSING"
  | "studies.status.PROCESSED"
  | "studies.status.FAILED"
  | "studies.status.REVIEWED"
  | "review.title"
  | "review.pendingEmpty"
  | "review.confidence"
  | "review.confirmed"
  | "review.notPresent"
  | "review.count"
  | "review.feedback"
  | "review.submit"
  | "review.incomplete"
  | "review.conflict"
  | "review.downloadVideo"
  | "review.noKeyframes"
  | "feedback.title"
  | "feedback.empty"
  | "feedback.verdicts"
  | "role.blocked"
  | "trajectory.VERTICAL"
  | "trajectory.HORIZONTAL"
  | "trajectory.DIAGONAL_1"
  | "trajectory.DIAGONAL_2";

export type Catalog = Record<CatalogKey, string>;

const es: Catalog = {
  "nav.upload": "Subir estudio",
  "nav.studies": "Mis estudios",
  "nav.feedback": "Retroalimentación",
  "nav.review": "Revisiones pendientes",
  "upload.title": "Subir un barrido",
  "upload.trajectory": "Trayectoria del barrido",
  "upload.chooseFile": "Seleccionar video",
  "upload.start": "Subir",
  "upload.inProgress": "Subiendo…",
  "upload.retry": "Reintentar",
  "upload.failed": "La subida falló. Revise su conexión e intente de nuevo.",
  "upload.done": "Estudio subido",
  "studies.title": "Mis estudios",
  "studies.empty": "Aún no hay estudios.",
  "studies.status.UPLOADED": "Subido",
  "studies.status.QUEUED": "En cola",
  "studies.status.PROCESSING": "Procesando",
  "studies.status.PROCESSED": "Procesado",
  "studies.status.FAILED": "Falló",
  "studies.status.REVIEWED": "Revisado",
  "review.title": "Revisión de estudio",
  "review.pendingEmpty": "No hay estudios en espera de revisión.",
  "review.confidence": "confianza",
  "review.confirmed": "Confirmado",
  "review.notPresent": "No presente",
  "review.count": "cuadros",
  "review.feedback": "Comentarios para la comadrona",
  "review.submit": "Enviar revisión",
  "review.incomplete": "Asigne un veredicto a cada plano antes de enviar.",
  "review.conflict": "El estudio cambió de estado; recargue e intente de nuevo.",
  "review.downloadVideo": "Descargar video",
  "review.noKeyframes": "Sin cuadros clave para este plano.",
  "feedback.title": "Retroalimentación recibida",
  "feedback.empty": "Aún no hay estudios revisados.",
  "feedback.verdicts": "Veredictos por plano",
  "role.blocked": "Esta vista no está disponible para su rol.",
  "trajectory.VERTICAL": "Vertical",
  "trajectory.HORIZONTAL": "Horizontal",
  "trajectory.DIAGONAL_1": "Diagonal 1",
  "trajectory.DIAGONAL_2": "Diagonal 2",
};

const en: Catalog = {
  "nav.upload": "Upload study",
  "nav.studies": "My studies",
  "nav.feedback": "Feedback",
  "nav.review": "Pending reviews",
  "upload.title": "Upload a sweep",
  "upload.trajectory": "Sweep trajectory",
  "upload.chooseFile": "Choose video",
  "upload.start": "Upload",
  "upload.inProgress": "Uploading…",
  "upload.retry": "Retry",
  "upload.failed": "Upload failed. Check your connection and try again.",
  "upload.done": "Study uploaded",
  "studies.title": "My studies",
  "studies.empty": "No studies yet.",
  "studies.status.UPLOADED": "Uploaded",
  "studies.status.QUEUED": "Queued",
  "studies.status.PROCESSING": "Processing",
  "studies.status.PROCESSED": "Processed",
  "studies.status.FAILED": "Failed",
  "studies.status.REVIEWED": "Reviewed",
  "review.title": "Study review",
  "review.pendingEmpty": "No studies awaiting review.",
  "review.confidence": "confidence",
  "review.confirmed": "Confirmed",
  "review.notPresent": "Not present",
  "review.count": "frames",
  "review.feedback": "Feedback for the midwife",
  "review.submit": "Submit review",
  "review.incomplete": "Set a verdict for every plane before submitting.",
  "review.conflict": "The study changed state; reload and try again.",
  "review.downloadVideo": "Download video",
  "review.noKeyframes": "No key frames for this plane.",
  "feedback.title": "Received feedback",
  "feedback.empty": "No reviewed studies yet.",
  "feedback.verdicts": "Per-plane verdicts",
  "role.blocked": "This view is not available for your role.",
  "trajectory.VERTICAL": "Vertical",
  "trajectory.HORIZONTAL": "Horizontal",
  "trajectory.DIAGONAL_1": "Diagonal 1",
  "trajectory.DIAGONAL_2": "Diagonal 2",
};

const catalogs = new Map<string, Catalog>([
  ["es", es],
  ["en", en],
]);

let activeLocale = "es";

export function registerCatalog(locale: string, catalog: Catalog): void {
  catalogs.set(locale, catalog);
}

export function setLocale(locale: string): void {
  if (!catalogs.has(locale)) {
    throw new Error(`no catalog registered for locale ${locale}`);
  }
  activeLocale = locale;
}

export function locale(): string {
  return activeLocale;
}

export function t(key: CatalogKey): string {
  const catalog = catalogs.get(activeLocale) ?? es;
  return catalog[key] ?? es[key] ?? key;
}
