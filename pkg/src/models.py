"""
Modelos Pydantic para la API
"""

from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class ErrorReport(BaseModel):
    """Modelo para reportar un error de procesamiento"""
    error_id: int = Field(..., description="ID del error en el catálogo")
    title: str = Field(..., description="Título del error")
    message: str = Field(..., description="Descripción concreta de lo ocurrido")


class ErrorCatalogEntry(BaseModel):
    """Entrada del catálogo de errores"""
    error_id: int = Field(..., description="ID único del error")
    title: str = Field(..., description="Título del error")
    cause: str = Field(..., description="Causa probable del error")
    suggestion: str = Field(..., description="Sugerencia para corregir el error")


class ErrorCatalog(BaseModel):
    """Modelo para el catálogo de errores"""
    errors: List[ErrorCatalogEntry] = Field(..., description="Errores detectables")


class MetricsResult(BaseModel):
    """Métricas de una trayectoria frente a la referencia"""
    translation_percent: Optional[float] = Field(None, ge=0, description="Error KITTI de traslación (%)")
    deg_per_100m: Optional[float] = Field(None, ge=0, description="Error KITTI de rotación (grados/100 m)")
    rpe_cm: float = Field(..., ge=0, description="Error relativo de pose (cm)")
    ate_m: float = Field(..., ge=0, description="Error absoluto de trayectoria (m)")
    associated_poses: int = Field(..., ge=0, description="Poses asociadas por marca de tiempo")
    unmatched_poses: int = Field(0, ge=0, description="Poses sin asociación")


class SweepSummary(BaseModel):
    """Diagnóstico de un barrido"""
    index: int
    timestamp_s: float
    correspondence_count: int
    final_cost: float
    icp_fitness: Optional[float] = Field(None, description="Fitness ICP; None si no se ejecutó")
    keyframe_created: bool
    fallback: bool


class OdometryResult(BaseModel):
    """Resultado de la odometría sobre los barridos subidos"""
    sweep_count: int = Field(..., ge=0, description="Número de barridos procesados")
    keyframe_count: int = Field(..., ge=0, description="Keyframes creados")
    fallback_count: int = Field(..., ge=0, description="Barridos con predicción de velocidad constante")
    trajectory_tum: str = Field(..., description="Trayectoria en formato TUM")
    sweeps: List[SweepSummary] = Field(default_factory=list, description="Diagnóstico por barrido")


class HealthCheck(BaseModel):
    """Modelo para la verificación de salud del sistema"""
    status: str = Field(..., description="Estado del sistema")
    version: str = Field(..., description="Versión actual del sistema")
    timestamp: datetime = Field(default_factory=datetime.now, description="Fecha y hora de la verificación")


class APIResponse(BaseModel):
    """Modelo base para respuestas de la API"""
    success: bool = Field(..., description="Indica si la operación fue exitosa")
    message: str = Field(..., description="Mensaje descriptivo")
    data: Optional[Dict[str, Any]] = Field(None, description="Datos de la respuesta")
