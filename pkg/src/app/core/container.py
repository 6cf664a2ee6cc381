"""의존성 주입 컨테이너"""
from typing import Any, Dict, Type, TypeVar
import inspect
import threading

T = TypeVar('T')


class DIContainer:
    """인터페이스 → 구현 매핑

    - singleton: 이미 만들어진 인스턴스
    - service: 생성자 타입 힌트로 의존성을 해결해 한 번만 생성
    """

    def __init__(self):
        self._singletons: Dict[Type, Any] = {}
        self._services: Dict[Type, Type] = {}
        self._lock = threading.RLock()

    def register_singleton(self, interface: Type[T], instance: T) -> None:
        self._singletons[interface] = instance

    def register_service(self, interface: Type[T], service_class: Type[T]) -> None:
        self._services[interface] = service_class
        self._singletons.pop(interface, None)

    def is_registered(self, interface: Type) -> bool:
        return interface in self._singletons or interface in self._services

    def get(self, interface: Type[T]) -> T:
        """서비스 인스턴스 조회"""
        if interface in self._singletons:
            return self._singletons[interface]
        if interface in self._services:
            with self._lock:
                if interface not in self._singletons:
                    self._singletons[interface] = self._create_instance(self._services[interface])
            return self._singletons[interface]
        name = getattr(interface, "__name__", repr(interface))
        raise LookupError(f"등록되지 않은 서비스입니다: {name}")

    def reset(self) -> None:
        """등록 정보 전체 초기화 (테스트용)"""
        self._singletons.clear()
        self._services.clear()

    def _create_instance(self, service_class: Type[T]) -> T:
        kwargs = {}
        for name, param in inspect.signature(service_class.__init__).parameters.items():
            if name == "self" or param.kind in (param.VAR_POSITIONAL, param.VAR_KEYWORD):
                continue
            annotation = param.annotation
            if annotation is not inspect.Parameter.empty and self.is_registered(annotation):
                kwargs[name] = self.get(annotation)
            elif param.default is inspect.Parameter.empty:
                raise LookupError(f"{service_class.__name__}의 의존성 {name}({annotation})을 해결할 수 없습니다")
        return service_class(**kwargs)


# 전역 컨테이너 인스턴스
container = DIContainer()
