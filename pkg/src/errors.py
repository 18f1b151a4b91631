"""
Errores del sistema de odometría radar y catálogo de errores
"""

from typing import Any, Dict


# Catálogo de errores detectables (servido por la API y documentado en docs/error_catalog.md)
ERROR_CATALOG: Dict[int, Dict[str, str]] = {
    1: {
        "title": "Barrido inválido",
        "cause": "Archivo RPS1 truncado, con cabecera corrupta o parámetros no positivos",
        "suggestion": "Regenerar el archivo .rps o revisar el conversor que lo produjo",
    },
    2: {
        "title": "Configuración inválida",
        "cause": "Clave desconocida, valor fuera de rango o línea mal formada",
        "suggestion": "Comparar con la salida de `dump-config`",
    },
    3: {
        "title": "Pesos degenerados",
        "cause": "Todas las intensidades de la celda son iguales a z_min",
        "suggestion": "Bajar filter.z_min o revisar la calibración de intensidades",
    },
    4: {
        "title": "Registro degenerado",
        "cause": "Muy pocas correspondencias entre el barrido y los keyframes",
        "suggestion": "Aumentar register.radius o reducir register.min_corr",
    },
    5: {
        "title": "Trayectoria insuficiente",
        "cause": "Trayectoria corta o marcas de tiempo sin asociación",
        "suggestion": "Usar segmentos más cortos (eval.segments) o revisar las marcas de tiempo",
    },
    6: {
        "title": "Error de simulación",
        "cause": "Mundo o trayectoria de referencia inválidos para la secuencia pedida",
        "suggestion": "Verificar que la trayectoria cubra todos los barridos",
    },
}


class RadarOdometryError(Exception):
    """Error base del sistema"""

    error_id: int = 0

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    @property
    def title(self) -> str:
        return ERROR_CATALOG.get(self.error_id, {}).get("title", "Error")

    def to_dict(self) -> Dict[str, Any]:
        """Representación serializable para la API"""
        return {"error_id": self.error_id, "title": self.title, "message": self.message}


class SweepFormatError(RadarOdometryError, ValueError):
    error_id = 1


class ConfigError(RadarOdometryError, ValueError):
    error_id = 2


class DegenerateWeightsError(RadarOdometryError, ValueError):
    error_id = 3


class DegenerateRegistrationError(RadarOdometryError):
    error_id = 4

    def __init__(self, message: str, correspondence_count: int = 0):
        super().__init__(message)
        self.correspondence_count = correspondence_count


class TrajectoryError(RadarOdometryError, ValueError):
    error_id = 5


class SimulationError(RadarOdometryError, ValueError):
    error_id = 6
