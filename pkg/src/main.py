"""
API principal del sistema de odometría por radar
"""

import math
from typing import List, Optional

from fastapi import FastAPI, File, HTTPException, Query, UploadFile
from fastapi.middleware.cors import CORSMiddleware

from .config import RunConfig, configure_logging, dump_config, settings
from .errors import ERROR_CATALOG, RadarOdometryError
from .evaluation import DEFAULT_SEGMENTS_M, evaluate_trajectories, format_tum_line, parse_tum
from .models import (
    APIResponse,
    ErrorCatalog,
    ErrorCatalogEntry,
    ErrorReport,
    HealthCheck,
    MetricsResult,
    OdometryResult,
    SweepSummary,
)
from .odometry import RadarOdometry
from .sweep_io import decode_sweep
from .variants import VARIANTS, apply_variant

app = FastAPI(
    title=settings.API_TITLE,
    description=settings.API_DESCRIPTION,
    version=settings.API_VERSION,
)

# Configuración CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=list(settings.CORS_ORIGINS),
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.on_event("startup")
async def startup():
    configure_logging()


async def _read_upload(file: UploadFile) -> bytes:
    content = await file.read()
    if len(content) > settings.MAX_UPLOAD_SIZE_MB * 1024 * 1024:
        raise HTTPException(status_code=413, detail=f"{file.filename} supera {settings.MAX_UPLOAD_SIZE_MB} MB")
    return content


def _bad_request(e: RadarOdometryError) -> HTTPException:
    return HTTPException(status_code=400, detail=ErrorReport(**e.to_dict()).dict())


@app.get("/")
async def root():
    """Endpoint raíz"""
    return {
        "message": settings.API_TITLE,
        "version": settings.API_VERSION,
        "status": "online"
    }


@app.get("/health", response_model=HealthCheck)
async def health_check():
    """Endpoint de verificación de salud"""
    return HealthCheck(status="healthy", version=settings.API_VERSION)


@app.get("/api/v1/config/defaults", response_model=APIResponse)
async def config_defaults():
    """Configuración por defecto del pipeline, como texto y por secciones"""
    defaults = RunConfig()
    return APIResponse(
        success=True,
        message="Configuración por defecto",
        data={"text": dump_config(defaults), "sections": defaults.dict(), "variants": sorted(VARIANTS)},
    )


@app.get("/api/v1/errors/catalog", response_model=ErrorCatalog)
async def get_error_catalog():
    """Retorna el catálogo completo de errores"""
    return ErrorCatalog(errors=[
        ErrorCatalogEntry(error_id=error_id, **entry) for error_id, entry in sorted(ERROR_CATALOG.items())
    ])


@app.post("/api/v1/evaluate", response_model=MetricsResult)
async def evaluate(
    est: UploadFile = File(...),
    gt: UploadFile = File(...),
    segments: Optional[str] = Query(None, description="Longitudes KITTI separadas por comas"),
    rpe_delta: int = Query(1, ge=1),
    tolerance: float = Query(0.05, gt=0),
) -> MetricsResult:
    """
    Evalúa una trayectoria estimada contra la referencia

    Args:
        est: Trayectoria estimada en formato TUM
        gt: Trayectoria de referencia en formato TUM

    Returns:
        MetricsResult con KITTI (si la longitud lo permite), RPE y ATE
    """
    try:
        lengths = [float(v) for v in segments.split(",") if v.strip()] if segments else list(DEFAULT_SEGMENTS_M)
    except ValueError:
        raise HTTPException(status_code=400, detail=f"segmentos inválidos: {segments}")

    try:
        estimate = parse_tum((await _read_upload(est)).decode("ascii", errors="replace"), est.filename)
        reference = parse_tum((await _read_upload(gt)).decode("ascii", errors="replace"), gt.filename)
        report = evaluate_trajectories(estimate, reference, lengths, rpe_delta, tolerance,
                                       require_kitti=segments is not None)
    except RadarOdometryError as e:
        raise _bad_request(e)

    return MetricsResult(
        translation_percent=report.translation_percent,
        deg_per_100m=report.deg_per_100m,
        rpe_cm=report.rpe_cm,
        ate_m=report.ate_m,
        associated_poses=report.associated_poses,
        unmatched_poses=report.unmatched_poses,
    )


@app.post("/api/v1/odometry", response_model=OdometryResult)
async def run_odometry(
    files: List[UploadFile] = File(...),
    variant: Optional[str] = Query(None, description="Variante predefinida del pipeline"),
) -> OdometryResult:
    """Ejecuta la odometría sobre barridos RPS1, ordenados por nombre de archivo"""
    config = RunConfig()
    if variant is not None:
        if variant not in VARIANTS:
            raise HTTPException(status_code=400, detail=f"variante desconocida: {variant}")
        config = apply_variant(config, variant)

    try:
        sweeps = [decode_sweep(await _read_upload(f)) for f in sorted(files, key=lambda f: f.filename or "")]
        run = RadarOdometry(config.to_odometry_config()).run(sweeps)
    except RadarOdometryError as e:
        raise _bad_request(e)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))

    return OdometryResult(
        sweep_count=len(run.diagnostics),
        keyframe_count=run.keyframe_count,
        fallback_count=run.fallback_count,
        trajectory_tum="".join(format_tum_line(t, p) + "\n" for t, p in run.trajectory),
        sweeps=[
            SweepSummary(
                index=d.index,
                timestamp_s=d.timestamp_s,
                correspondence_count=d.correspondence_count,
                final_cost=d.final_cost,
                icp_fitness=d.icp_fitness if math.isfinite(d.icp_fitness) else None,
                keyframe_created=d.keyframe_created,
                fallback=d.fallback,
            )
            for d in run.diagnostics
        ],
    )
